// Reference external-PES server speaking the pins line protocol on
// stdin/stdout. Doubles as the worked example for wrapping a real PES code:
//
//   <- HELLO <fn>        reply OK (or ERR <msg>)
//   <- EVAL <n>          then n lines of fn coordinates
//   -> OK                then n lines, one energy (hartree) per line
//
// Models: gaussian (sum x^2/2), zero (always 0), morse (needs --d-e --a --r-e,
// fn must be 3).

#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Options {
    std::string model = "gaussian";
    double d_e = 0.1, a = 1.0, r_e = 2.0;
};

double eval_point(const Options& opt, const std::vector<double>& x)
{
    if (opt.model == "zero") return 0.0;
    if (opt.model == "gaussian") {
        double v = 0.0;
        for (double xi : x) v += 0.5 * xi * xi;
        return v;
    }
    // morse
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double t = 1.0 - std::exp(-opt.a * (r - opt.r_e));
    return opt.d_e * t * t;
}

}  // namespace

int main(int argc, char** argv)
{
    Options opt;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> const char* { return i + 1 < argc ? argv[++i] : ""; };
        if (arg == "--model")
            opt.model = next();
        else if (arg == "--d-e")
            opt.d_e = std::atof(next());
        else if (arg == "--a")
            opt.a = std::atof(next());
        else if (arg == "--r-e")
            opt.r_e = std::atof(next());
        else {
            std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
            return 2;
        }
    }
    if (opt.model != "gaussian" && opt.model != "zero" && opt.model != "morse") {
        std::fprintf(stderr, "unknown model %s\n", opt.model.c_str());
        return 2;
    }

    int fn = 0;
    std::string line;
    while (std::getline(std::cin, line)) {
        std::istringstream iss(line);
        std::string verb;
        iss >> verb;
        if (verb == "HELLO") {
            iss >> fn;
            if (fn < 1) {
                std::printf("ERR bad fn\n");
                std::fflush(stdout);
                return 1;
            }
            if (opt.model == "morse" && fn != 3) {
                std::printf("ERR morse needs fn=3\n");
                std::fflush(stdout);
                return 1;
            }
            std::printf("OK\n");
            std::fflush(stdout);
        } else if (verb == "EVAL") {
            long n = -1;
            iss >> n;
            if (n < 0 || fn < 1) {
                std::printf("ERR bad EVAL\n");
                std::fflush(stdout);
                return 1;
            }
            std::vector<std::vector<double>> points(n, std::vector<double>(fn));
            for (long p = 0; p < n; ++p) {
                if (!std::getline(std::cin, line)) {
                    std::printf("ERR truncated batch\n");
                    std::fflush(stdout);
                    return 1;
                }
                std::istringstream coords(line);
                for (int d = 0; d < fn; ++d)
                    if (!(coords >> points[p][d])) {
                        std::printf("ERR malformed coordinate line\n");
                        std::fflush(stdout);
                        return 1;
                    }
            }
            std::printf("OK\n");
            for (long p = 0; p < n; ++p) std::printf("%.17g\n", eval_point(opt, points[p]));
            std::fflush(stdout);
        } else if (!verb.empty()) {
            std::printf("ERR unknown verb %s\n", verb.c_str());
            std::fflush(stdout);
            return 1;
        }
    }
    return 0;
}
