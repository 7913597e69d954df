#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace msle {

/// Accumulates named wall-clock phases (graph build, eigen, apg, classify, ...).
class PhaseTimer {
public:
    void start(const std::string& name) {
        stop();
        current_ = name;
        t0_ = std::chrono::steady_clock::now();
    }

    void stop() {
        if (current_.empty()) return;
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        for (auto& [n, s] : phases_) {
            if (n == current_) {
                s += dt;
                current_.clear();
                return;
            }
        }
        phases_.emplace_back(current_, dt);
        current_.clear();
    }

    double total() const {
        double s = 0;
        for (const auto& [n, t] : phases_) s += t;
        return s;
    }

    const std::vector<std::pair<std::string, double>>& phases() const { return phases_; }

    void write_tsv(const std::string& path) const {
        std::ofstream out(path);
        out << "phase\tseconds\n";
        char buf[64];
        for (const auto& [n, t] : phases_) {
            std::snprintf(buf, sizeof(buf), "%.3f", t);
            out << n << '\t' << buf << '\n';
        }
        std::snprintf(buf, sizeof(buf), "%.3f", total());
        out << "total\t" << buf << '\n';
    }

    void print(std::FILE* f = stderr) const {
        for (const auto& [n, t] : phases_)
            std::fprintf(f, "[msle] phase %-16s %8.2f s\n", n.c_str(), t);
        std::fprintf(f, "[msle] phase %-16s %8.2f s\n", "total", total());
    }

private:
    std::vector<std::pair<std::string, double>> phases_;
    std::string current_;
    std::chrono::steady_clock::time_point t0_;
};

} // namespace msle
