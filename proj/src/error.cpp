#include "jcbeat/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace jcbeat::diag {

namespace {
std::mutex sink_mutex;
Sink& current_sink() {
    static Sink sink;
    return sink;
}
} // namespace

void warn(const std::string& message) {
    std::lock_guard lock(sink_mutex);
    if (auto& sink = current_sink()) {
        sink(message);
    } else {
        std::cerr << "jcbeat: warning: " << message << '\n';
    }
}

Sink set_sink(Sink sink) {
    std::lock_guard lock(sink_mutex);
    return std::exchange(current_sink(), std::move(sink));
}

} // namespace jcbeat::diag
