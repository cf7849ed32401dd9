#include "abdd/verify.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <queue>
#include <thread>

#include "abdd/error.hpp"
#include "abdd/sat.hpp"
#include "json.hpp"

namespace abdd {

namespace {

bool query(const Circuit& target, const BitVector& x, std::size_t k,
           const RobustnessOptions& opts) {
  const auto ball = hamming_circuit(x, k);
  const auto enc = tseitin(conjoin(ball, target));
  const auto res = solve(enc.cnf, {opts.timeout, true});
  if (res.status == SatStatus::Timeout)
    throw Indeterminate("robustness query timed out at radius " + std::to_string(k),
                        static_cast<int>(k));
  return res.status == SatStatus::Sat;
}

}  // namespace

InstanceRobustness instance_robustness(const Circuit& f, const BitVector& x,
                                       const RobustnessOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = x.size();
  InstanceRobustness r;
  r.x = x;
  const bool fx = eval_circuit(f, x);  // also checks inputs are x<i> with i < n
  r.label = fx ? 1 : -1;
  // Search for x' with f(x') != f(x): positive instances query NOT f.
  const Circuit target = fx ? negate(f) : f;
  for (std::size_t k = 1; k <= n; ++k) {
    ++r.queries;
    if (!query(target, x, k, opts)) continue;
    r.radius = k;
    if (opts.check_monotone && k < n) {
      ++r.queries;
      if (!query(target, x, k + 1, opts))
        throw Error("Hamming-ball monotonicity violated at radius " + std::to_string(k + 1));
    }
    break;
  }
  if (r.radius == 0) throw TrivialFunction("instance_robustness: function is constant");
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

RobustnessReport sample_robustness(const Circuit& f, const std::vector<BitVector>& sample,
                                   const RobustnessOptions& opts) {
  if (sample.empty()) throw InputError("sample_robustness: empty sample");
  RobustnessReport rep;
  rep.instances.resize(sample.size());
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(sample.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < sample.size(); i = next++) {
      try {
        rep.instances[i] = instance_robustness(f, sample[i], opts);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  double total = 0.0;
  for (const auto& r : rep.instances) total += static_cast<double>(r.radius);
  rep.value = total / static_cast<double>(sample.size());
  return rep;
}

double model_robustness(const Circuit& f, std::size_t n, std::size_t cap) {
  if (n > cap || n > 24) throw ResourceError("model_robustness: dimension over cap");
  const std::size_t cube = std::size_t{1} << n;
  std::vector<char> value(cube);
  for (std::size_t k = 0; k < cube; ++k) value[k] = eval_circuit(f, BitVector::from_index(k, n));
  // Multi-source BFS from each class: distance to the nearest point of the
  // other class.
  std::vector<std::uint32_t> dist_to[2];
  for (int cls = 0; cls < 2; ++cls) {
    auto& d = dist_to[cls];
    d.assign(cube, UINT32_MAX);
    std::queue<std::size_t> q;
    for (std::size_t k = 0; k < cube; ++k)
      if (value[k] == cls) {
        d[k] = 0;
        q.push(k);
      }
    while (!q.empty()) {
      const auto k = q.front();
      q.pop();
      for (std::size_t b = 0; b < n; ++b) {
        const auto nb = k ^ (std::size_t{1} << b);
        if (d[nb] == UINT32_MAX) {
          d[nb] = d[k] + 1;
          q.push(nb);
        }
      }
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < cube; ++k) {
    const auto r = dist_to[value[k] ? 0 : 1][k];
    if (r == UINT32_MAX) throw TrivialFunction("model_robustness: function is constant");
    total += r;
  }
  return total / static_cast<double>(cube);
}

std::string to_json(const RobustnessReport& r) {
  nlohmann::json j;
  j["value"] = r.value;
  auto arr = nlohmann::json::array();
  for (const auto& i : r.instances)
    arr.push_back({{"x", i.x.to_string()}, {"label", i.label}, {"radius", i.radius},
                   {"queries", i.queries}});
  j["instances"] = std::move(arr);
  return j.dump(1);
}

}  // namespace abdd
