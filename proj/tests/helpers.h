#ifndef NETHIST_TESTS_HELPERS_H_
#define NETHIST_TESTS_HELPERS_H_

#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "nethist/graph.h"
#include "nethist/random.h"

namespace testing_support {

using nethist::Graph;

inline Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  return Graph(n, edges);
}

inline Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

inline Graph cycle_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph(n, e);
}

inline Graph erdos_renyi(int n, double p, uint64_t seed) {
  nethist::Rng rng(seed);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) e.emplace_back(i, j);
  return Graph(n, e);
}

// Two-block planted partition; nodes are assigned to blocks by a random
// shuffle so the plant is not visible in node order. planted[i] is 0 or 1.
inline Graph planted_two_block(int n, double p_in, double p_out, uint64_t seed,
                               std::vector<int>* planted) {
  nethist::Rng rng(seed);
  std::vector<int> block(n);
  for (int i = 0; i < n; ++i) block[i] = i < n / 2 ? 0 : 1;
  for (int i = n - 1; i > 0; --i) std::swap(block[i], block[rng.below(i + 1)]);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(block[i] == block[j] ? p_in : p_out)) e.emplace_back(i, j);
  if (planted) *planted = block;
  return Graph(n, e);
}

inline std::vector<int> random_permutation(int n, nethist::Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
  return p;
}

// Same partition up to relabeling of the groups.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = i + 1; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("nethist_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testing_support

#endif  // NETHIST_TESTS_HELPERS_H_
