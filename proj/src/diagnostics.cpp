#include "mlenkbf/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <map>
#include <mutex>
#include <string>

namespace mlenkbf {
namespace {

constexpr int kMaxReportsPerTopic = 3;

std::atomic<bool> g_quiet{false};
std::mutex g_mutex;
std::map<std::string, int, std::less<>> g_counts;

}  // namespace

void set_quiet(bool quiet) { g_quiet.store(quiet); }

bool quiet() { return g_quiet.load(); }

void warn(std::string_view topic, std::string_view message) {
  if (g_quiet.load()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  auto it = g_counts.find(topic);
  if (it == g_counts.end()) it = g_counts.emplace(std::string(topic), 0).first;
  if (++it->second > kMaxReportsPerTopic) return;
  std::cerr << "warning [" << topic << "]: " << message;
  if (it->second == kMaxReportsPerTopic) std::cerr << " (further reports suppressed)";
  std::cerr << '\n';
}

}  // namespace mlenkbf
