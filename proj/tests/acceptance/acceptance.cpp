// Acceptance run: the full verification battery at its default desk-scale
// configuration, one line per criterion.
#include <cstdio>
#include <string>

#include "chb6/verify.hpp"

int main(int argc, char** argv) {
  chb6::verify::VerifyConfig config;
  for (int i = 1; i < argc; ++i) config.only.emplace_back(argv[i]);

  int failed = 0;
  int index = 0;
  chb6::verify::run_battery(config, [&](const chb6::verify::CheckResult& r) {
    ++index;
    if (!r.pass) ++failed;
    std::printf("[%s] %2d %-14s value=%-12.5g threshold=%-10.3g %6.1fs  %s\n", r.pass ? "PASS" : "FAIL", index,
                r.name.c_str(), r.value, r.threshold, r.seconds, r.detail.c_str());
    std::fflush(stdout);
  });
  std::printf("%d of %d criteria failed\n", failed, index);
  return failed == 0 ? 0 : 1;
}
