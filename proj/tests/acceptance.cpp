#include <cstring>
#include <iostream>
#include <string>

#include "loctime/acceptance.hpp"

// Prints one PASS/FAIL line per acceptance criterion; exit 0 iff all pass.
int main(int argc, char** argv) {
  loctime::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) options.quick = true;
    else if (std::strncmp(argv[i], "--threads=", 10) == 0) options.threads = std::stoul(argv[i] + 10);
    else if (std::strncmp(argv[i], "--only=", 7) == 0) options.only.insert(std::stoi(argv[i] + 7));
    else {
      std::cerr << "usage: acceptance [--quick] [--threads=N] [--only=ID]...\n";
      return 2;
    }
  }
  options.progress = [](const std::string& msg) { std::cerr << "  .. " << msg << "\n"; };
  const auto run = loctime::run_acceptance(options);
  for (const auto& o : run.criteria) std::cout << loctime::format_outcome(o) << "\n";
  std::cout << (run.passed() ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
  return run.passed() ? 0 : 1;
}
