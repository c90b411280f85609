#include "mmalign/log.h"

#include <iostream>
#include <mutex>

namespace mmalign {
namespace {

std::mutex sink_mu;

void DefaultSink(LogLevel level, const std::string& message) {
  std::cerr << (level == LogLevel::kWarning ? "W " : "I ") << message << "\n";
}

LogSink& Sink() {
  static LogSink sink = DefaultSink;
  return sink;
}

void Emit(LogLevel level, const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mu);
  if (Sink()) Sink()(level, message);
}

}  // namespace

LogSink SetLogSink(LogSink sink) {
  std::lock_guard<std::mutex> lock(sink_mu);
  LogSink old = std::move(Sink());
  Sink() = std::move(sink);
  return old;
}

void LogInfo(const std::string& message) { Emit(LogLevel::kInfo, message); }
void LogWarning(const std::string& message) {
  Emit(LogLevel::kWarning, message);
}

}  // namespace mmalign
