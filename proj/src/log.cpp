#include "kinocbs/log.hpp"

#include <cstdlib>
#include <string>

namespace kinocbs::log {

int level() {
  static const int lvl = [] {
    const char* env = std::getenv("KINO_CBS_LOG");
    if (env == nullptr) return 0;
    const std::string v(env);
    if (v == "debug" || v == "2") return 2;
    if (v == "info" || v == "1") return 1;
    return 0;
  }();
  return lvl;
}

}  // namespace kinocbs::log
