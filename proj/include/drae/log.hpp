#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace drae::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from the DRAE_LOG env var (error|warn|info|debug), default warn.
inline Level threshold() {
    static const Level lvl = [] {
        const char* env = std::getenv("DRAE_LOG");
        if (env == nullptr) return Level::Warn;
        if (std::strcmp(env, "error") == 0) return Level::Error;
        if (std::strcmp(env, "warn") == 0) return Level::Warn;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        return Level::Warn;
    }();
    return lvl;
}

inline void write(Level lvl, const std::string& msg) {
    if (lvl > threshold()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[drae:%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void error(const std::string& msg) { write(Level::Error, msg); }
inline void warn(const std::string& msg) { write(Level::Warn, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void debug(const std::string& msg) { write(Level::Debug, msg); }

}  // namespace drae::log
