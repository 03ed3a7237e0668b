#pragma once

#include <string>
#include <vector>

namespace netinf {

// Ordered run log. Every line starts "t=<tick>"; emission order within a
// tick is event order, which the engine keeps deterministic.
class TraceSink {
 public:
  void line(std::string text) { lines_.push_back(std::move(text)); }

  void take(std::vector<std::string>&& batch) {
    for (auto& text : batch) lines_.push_back(std::move(text));
    batch.clear();
  }

  const std::vector<std::string>& lines() const { return lines_; }

  std::string joined() const {
    std::string out;
    for (const auto& text : lines_) {
      out += text;
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::string> lines_;
};

} // namespace netinf
