#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "psyeval/errors.hpp"
#include "psyeval/simulate.hpp"

namespace psyeval {

namespace {

struct CellOutcome {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  CellError error;
  std::size_t requests = 0;
};

CellOutcome query_cell(Responder& responder, const CompletionRequest& request, const SimulationConfig& cfg,
                       const LikertScale& likert, std::mutex* serial) {
  CellOutcome out;
  auto backoff = cfg.backoff;
  for (int attempt = 0;; ++attempt) {
    ++out.requests;
    out.error.attempts = attempt + 1;
    std::string reply;
    try {
      if (serial) {
        std::lock_guard<std::mutex> lock(*serial);
        reply = responder.complete(request);
      } else {
        reply = responder.complete(request);
      }
    } catch (const TransportError& e) {
      if (attempt < cfg.retries) {
        if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
        backoff *= 2;
        continue;
      }
      out.failed = true;
      out.error.reason = "transport";
      out.error.message = e.what();
      return out;
    } catch (const Error& e) {
      out.failed = true;
      out.error.reason = "responder";
      out.error.message = e.what();
      return out;
    }
    try {
      out.value = parse_likert_response(reply, likert);
    } catch (const UnparseableResponseError& e) {
      out.failed = true;
      out.error.reason = "unparseable";
      out.error.message = e.what();
    }
    return out;
  }
}

}  // namespace

SimulationResult run_simulation(const std::vector<SubjectProfile>& profiles, const ScaleSpec& spec,
                                const SimulationConfig& cfg, Responder& responder) {
  if (profiles.empty()) throw ConfigError("no profiles to simulate");
  if (!(cfg.temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
  if (cfg.max_parallel < 1) throw ConfigError("max_parallel must be at least 1");
  if (cfg.retries < 0) throw ConfigError("retries must be non-negative");

  std::vector<std::string> subject_ids;
  std::vector<std::string> descriptions;
  for (const auto& profile : profiles) {
    if (method_of(profile) != cfg.method) {
      throw ConfigError("profile " + subject_id_of(profile) + " is not a " + to_string(cfg.method) + " profile");
    }
    validate_profile(profile, cfg.check_questions);
    subject_ids.push_back(subject_id_of(profile));
    descriptions.push_back(render_description(profile));
  }

  const auto& items = spec.items();
  const auto& likert = spec.likert();
  const std::size_t n_items = items.size();
  const std::size_t n_cells = profiles.size() * n_items;
  std::vector<CellOutcome> outcomes(n_cells);

  std::mutex serial_mutex;
  std::mutex* serial = responder.concurrent_safe() ? nullptr : &serial_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < n_cells; cell = next++) {
      const std::size_t s = cell / n_items;
      const std::size_t j = cell % n_items;
      CompletionRequest request{build_prompt(descriptions[s], items[j], likert), cfg.temperature};
      outcomes[cell] = query_cell(responder, request, cfg, likert, serial);
      outcomes[cell].error.subject_id = subject_ids[s];
      outcomes[cell].error.item_id = items[j].id;
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_parallel), n_cells);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(profiles.size()), static_cast<Eigen::Index>(n_items));
  std::vector<int> item_ids;
  for (const auto& item : items) item_ids.push_back(item.id);
  SimulationResult result{ResponseMatrix({}, {}, Eigen::MatrixXd(0, 0), Coding::Raw, likert), {}, 0};
  std::size_t failures = 0;
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const auto& o = outcomes[cell];
    values(static_cast<Eigen::Index>(cell / n_items), static_cast<Eigen::Index>(cell % n_items)) = o.value;
    result.requests += o.requests;
    if (o.failed) {
      ++failures;
      result.errors.push_back(o.error);
    }
  }
  if (failures == n_cells) {
    throw ResponderError("every request failed; first error: " + result.errors.front().message);
  }
  result.matrix = ResponseMatrix(std::move(subject_ids), std::move(item_ids), std::move(values), Coding::Raw, likert);
  return result;
}

}  // namespace psyeval
