#ifndef MMALIGN_LOG_H_
#define MMALIGN_LOG_H_

#include <functional>
#include <string>

namespace mmalign {

enum class LogLevel { kInfo, kWarning };

// Replaces the log sink (stderr by default). Returns the previous sink.
using LogSink = std::function<void(LogLevel, const std::string&)>;
LogSink SetLogSink(LogSink sink);

void LogInfo(const std::string& message);
void LogWarning(const std::string& message);

}  // namespace mmalign

#endif  // MMALIGN_LOG_H_
