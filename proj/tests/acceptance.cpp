// Acceptance suite: one line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <string>

#include "apsift/checks.hpp"

namespace {

struct Runner {
  bool all_pass = true;
  int index = 0;

  void run(const char* label, double time_budget_s,
           apsift::checks::Check (*fn)(std::uint64_t), std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    apsift::checks::Check c;
    try {
      c = fn(seed);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_budget = time_budget_s <= 0 || secs <= time_budget_s;
    bool pass = c.pass && in_budget;
    all_pass = all_pass && pass;
    std::printf("[%s] criterion %2d %-28s %s (%.2fs%s)\n", pass ? "PASS" : "FAIL", ++index,
                label, c.detail.c_str(), secs,
                in_budget ? "" : ", over the stated time budget");
    std::fflush(stdout);
  }
};

using apsift::checks::Check;

Check c1(std::uint64_t s) { return apsift::checks::sift_identity_suite(s, 500, 12); }
Check c2(std::uint64_t s) { return apsift::checks::standard_facts_suite(s, 200, 64); }
Check c3(std::uint64_t s) { return apsift::checks::fourier_suite(s, 200, 256); }
Check c4(std::uint64_t s) { return apsift::checks::ap_count_suite(s, 300, 49); }
Check c5(std::uint64_t s) { return apsift::checks::bohr_suite(s, 100, 10007); }
Check c6(std::uint64_t s) { return apsift::checks::compare_suite(s, 100); }
Check c7(std::uint64_t s) { return apsift::checks::weighted_sift_suite(s, 50); }
Check c8(std::uint64_t s) { return apsift::checks::periodicity_suite(s, 50); }
Check c9(std::uint64_t s) { return apsift::checks::chang_suite(s, 50); }
Check c10(std::uint64_t s) { return apsift::checks::ff_drive_suite(s, 200); }
Check c11(std::uint64_t s) { return apsift::checks::cyclic_drive_suite(s, 50, 2001); }
Check c12(std::uint64_t s) { return apsift::checks::extremal_suite(s, 10000); }

}  // namespace

int main() {
  const std::uint64_t seed = 42;
  Runner r;
  r.run("weighted-sifting identity", 60, c1, seed);
  r.run("standard facts", 0, c2, seed);
  r.run("fourier round trip", 0, c3, seed);
  r.run("3-AP count cross-check", 0, c4, seed);
  r.run("bohr suite", 0, c5, seed);
  r.run("even-moment comparison", 0, c6, seed);
  r.run("weighted sift", 0, c7, seed);
  r.run("almost-periodicity", 0, c8, seed);
  r.run("chang hosts", 0, c9, seed);
  r.run("ff dichotomy drives", 600, c10, seed);
  r.run("cyclic drives", 0, c11, seed);
  r.run("extremal oracle", 0, c12, seed);
  return r.all_pass ? 0 : 1;
}
