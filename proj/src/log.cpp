#include "treebary/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace treebary {

namespace {

std::mutex sink_mutex;
WarningSink current_sink;

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex);
  std::swap(sink, current_sink);
  return sink;
}

void warn(std::string_view message) {
  std::lock_guard<std::mutex> lock(sink_mutex);
  if (current_sink) {
    current_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace treebary
