#pragma once

#include <iostream>
#include <sstream>

namespace kinocbs::log {

// 0: quiet, 1: info, 2: debug. Controlled by the KINO_CBS_LOG env var
// ("info"/"debug" or a number).
int level();

}  // namespace kinocbs::log

#define KINOCBS_LOG_INFO(expr)                               \
  do {                                                       \
    if (::kinocbs::log::level() >= 1) {                      \
      std::ostringstream os_;                                \
      os_ << "[kino-cbs] " << expr << "\n";                  \
      std::cerr << os_.str();                                \
    }                                                        \
  } while (0)

#define KINOCBS_LOG_DEBUG(expr)                              \
  do {                                                       \
    if (::kinocbs::log::level() >= 2) {                      \
      std::ostringstream os_;                                \
      os_ << "[kino-cbs] " << expr << "\n";                  \
      std::cerr << os_.str();                                \
    }                                                        \
  } while (0)
