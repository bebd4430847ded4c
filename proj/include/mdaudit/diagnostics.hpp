#pragma once

#include <string>
#include <vector>

namespace mdaudit {

struct Diagnostic {
    std::string subject;  // record id, DOI, repository id ...
    std::string code;
    std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline void note(Diagnostics* d, std::string subject, std::string code, std::string message) {
    if (d) d->push_back({std::move(subject), std::move(code), std::move(message)});
}

}  // namespace mdaudit
