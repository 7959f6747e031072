// One line per acceptance criterion; exit status 1 if any fails.
// Usage: acceptance [--out DIR] [--threads N] [--only 1,2,...]

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "pvsearch/verify.hpp"

int main(int argc, char** argv) {
  pvs::VerifyOptions opt;
  opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<int> ids;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const std::string val = argv[i + 1];
    if (flag == "--out") {
      opt.out = val;
    } else if (flag == "--threads") {
      opt.threads = std::atoi(val.c_str());
    } else if (flag == "--only") {
      std::stringstream ss(val);
      std::string x;
      while (std::getline(ss, x, ',')) ids.push_back(std::atoi(x.c_str()));
    } else {
      std::cerr << "unknown flag " << flag << "\n";
      return 2;
    }
  }
  bool ok = true;
  for (const auto& r : pvs::verify(opt, ids)) {
    std::cout << pvs::format_line(r) << std::endl;
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}
