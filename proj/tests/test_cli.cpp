#include <doctest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include <fmt/format.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const auto cmd = fmt::format("{} {} 2>/dev/null", SWIMEVO_CLI, args);
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_path(const char* tag) {
    return fs::temp_directory_path() / fmt::format("swimevo-cli-{}-{}", tag, std::random_device{}());
}

// Starts `serve` in the background and waits for it to answer.
struct Serve {
    pid_t pid = -1;
    int port;

    Serve(int port_, const fs::path& journals) : port(port_) {
        pid = ::fork();
        if (pid == 0) {
            const auto p = std::to_string(port);
            ::execl(SWIMEVO_CLI, SWIMEVO_CLI, "serve", "--port", p.c_str(), "--journal-dir", journals.c_str(),
                    static_cast<char*>(nullptr));
            ::_exit(127);
        }
        httplib::Client c("127.0.0.1", port);
        c.set_connection_timeout(1);
        c.set_read_timeout(1);
        for (int i = 0; i < 100; ++i) {
            if (auto r = c.Get("/api/sessions")) return;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    int stop() {
        ::kill(pid, SIGTERM);
        int status = 0;
        ::waitpid(pid, &status, 0);
        pid = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    ~Serve() {
        if (pid > 0) stop();
    }
};

int free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

}  // namespace

TEST_CASE("cli space") {
    const auto r = run("space");
    CHECK(r.code == 0);
    CHECK(r.out.find("345600") != std::string::npos);

    const auto j = run("space --json");
    CHECK(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["cardinality"] == 345600);

    const auto file = temp_path("space");
    std::ofstream(file) << j.out;
    const auto again = run("space --json --file " + file.string());
    CHECK(again.out == j.out);

    std::ofstream(file) << "power W : 1 2\nflag - : 0 1 \n";
    const auto custom = run("space --file " + file.string());
    CHECK(custom.code == 0);
    CHECK(custom.out.find("cardinality 4") != std::string::npos);

    std::ofstream(file) << "power W 1 2\n";
    CHECK(run("space --file " + file.string()).code == 2);
    CHECK(run("space --file /nonexistent/space").code == 2);
    fs::remove(file);
}

TEST_CASE("cli trial") {
    const auto a = run("trial --algo ga --sigma 0.25 --seed 7");
    CHECK(a.code == 0);
    CHECK(lines(a.out) == 1 + 5);
    CHECK(run("trial --algo ga --sigma 0.25 --seed 7").out == a.out);
    CHECK(run("trial --algo ga --sigma 0.25 --seed 8").out != a.out);
    CHECK(lines(run("trial --iterations 1").out) == 1 + 1);
    CHECK(run("trial --algo pso --w 0.4 --c2 1.8 --seed 2").code == 0);
    CHECK(run("trial --algo ga --adaptive --m-min 0.5 --m-max 2 --selection roulette --pool all_history").code == 0);

    CHECK(run("trial --algo pso --selection rank").code == 2);
    CHECK(run("trial --algo ga --w 1").code == 2);
    CHECK(run("trial --algo ga --rate 1 --m-min 1").code == 2);
    CHECK(run("trial --algo ga --adaptive --m-min 2 --m-max 1").code == 2);
    CHECK(run("trial --algo xx").code == 2);
    CHECK(run("trial --iterations 0").code == 2);
    CHECK(run("trial --sigma 0").code == 2);
    CHECK(run("bogus").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("cli sweep") {
    const auto out1 = temp_path("p1"), out8 = temp_path("p8");
    const std::string grid = "sweep --algo pso --grid w=0:0.4:0.2 --grid c2=1,2 --sigma 0.1 --sigma 0.5 --reps 10 --seed 3";
    CHECK(run(grid + " --parallel 1 --out " + out1.string()).code == 0);
    CHECK(run(grid + " --parallel 8 --out " + out8.string()).code == 0);
    const auto csv = slurp(out1);
    CHECK(csv == slurp(out8));
    CHECK(lines(csv) == 1 + 2 * 6);
    CHECK(run(grid).out == csv);

    CHECK(run("sweep --reps 0").code == 2);
    CHECK(run("sweep --parallel 0").code == 2);
    CHECK(run("sweep --grid nonsense").code == 2);
    CHECK(run("sweep --algo ga --grid w=0,1").code == 2);
    CHECK(run("sweep --spec /nonexistent.json").code == 2);
    CHECK(run("sweep --preset other").code == 2);
    CHECK(run("sweep --reps 2 --out /nonexistent-dir/x.csv").code == 1);

    const auto spec = temp_path("spec");
    std::ofstream(spec) << R"({"algorithm": "ga", "sigmas": [0.25], "repetitions": 2,
        "grid": [{"parameter": "selection", "values": ["rank", "roulette"]}]})";
    const auto from_spec = run("sweep --spec " + spec.string());
    CHECK(from_spec.code == 0);
    CHECK(lines(from_spec.out) == 3);
    fs::remove(spec);
    fs::remove(out1);
    fs::remove(out8);
}

TEST_CASE("cli full study grid row count") {
    const auto r = run("sweep --preset pso-study --sigma 0.1 --reps 10 --parallel 8");
    CHECK(r.code == 0);
    CHECK(lines(r.out) == 1 + 4096);
}

TEST_CASE("cli serve recovers sessions and stops on SIGTERM") {
    const auto journals = temp_path("journals") / "nested";
    const int port = free_port();
    std::string id;
    {
        Serve s(port, journals);
        CHECK(fs::exists(journals));
        httplib::Client c("127.0.0.1", port);
        auto created = c.Post("/api/sessions", R"({"name": "lab", "algorithm": "ga", "seed": 1})", "application/json");
        REQUIRE(created);
        CHECK(created->status == 201);
        id = nlohmann::json::parse(created->body)["id"];
        CHECK(c.Put("/api/sessions/" + id + "/generations/current/robots/0/measurement", R"({"speed": 2})",
                    "application/json")
                  ->status == 200);
        CHECK(s.stop() == 0);
    }
    {
        Serve s(port, journals);
        httplib::Client c("127.0.0.1", port);
        auto list = c.Get("/api/sessions");
        REQUIRE(list);
        const auto sessions = nlohmann::json::parse(list->body)["sessions"];
        REQUIRE(sessions.size() == 1);
        CHECK(sessions[0]["id"] == id);
        CHECK(sessions[0]["measured_count"] == 1);

        // A second server on the same port fails with a runtime error.
        const auto busy = run(fmt::format("serve --port {} --journal-dir {}", port, journals.string()));
        CHECK(busy.code == 1);
        CHECK(s.stop() == 0);
    }
    fs::remove_all(journals.parent_path());
}
