#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "psyeval/scale_model.hpp"

namespace psyeval {

inline constexpr std::size_t kPsiQuestionCount = 32;
inline constexpr std::string_view kBaseTemplate = "For the following task, respond in a way that matches:";

// The fixed interview question list, in interview order.
const std::array<std::string_view, kPsiQuestionCount>& psi_questions();

struct QaPair {
  std::string question;
  std::string answer;
};

struct InterviewTranscript {
  std::string subject_id;
  std::vector<QaPair> qa;  // always 32 pairs
  // Questions left out of the rendered description (1-based).
  std::vector<int> omitted;

  // Copy with question k (1..32) omitted. Throws ArgumentError.
  InterviewTranscript without_question(int k) const;
};

struct PersonaProfile {
  std::string subject_id;
  std::vector<std::string> sentences;  // exactly 5
};

struct ShapeMarker {
  std::string low;
  std::string high;
};

struct ShapeProfile {
  std::string subject_id;
  std::vector<ShapeMarker> markers;  // exactly 5
  int level = 5;                     // 1..9
};

using SubjectProfile = std::variant<InterviewTranscript, PersonaProfile, ShapeProfile>;

enum class Method { Psi, Persona, Shape };
const char* to_string(Method m);
// Accepts psi, persona, shape (any case). Throws ConfigError.
Method parse_method(std::string_view text);

const std::string& subject_id_of(const SubjectProfile& profile);
Method method_of(const SubjectProfile& profile);

// Throws ProfileError. With `check_questions`, transcript questions must equal
// the canonical list after whitespace trimming.
void validate_profile(const SubjectProfile& profile, bool check_questions = false);

// Qualified adjective for one of the nine intensity levels. Throws ProfileError.
std::string shape_qualifier(const ShapeMarker& marker, int level);

// Description text d for a profile. Throws ProfileError.
std::string render_description(const SubjectProfile& profile);

// T_base, the description, then the item instruction and Likert anchors.
// Throws ProfileError on an empty description.
std::string build_prompt(std::string_view description, const ItemDef& item, const LikertScale& likert);

// First standalone integer token inside the scale. Throws UnparseableResponseError.
int parse_likert_response(std::string_view reply, const LikertScale& likert);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
};

class Responder {
 public:
  virtual ~Responder() = default;
  // Raw reply text. Throws TransportError for retryable failures and
  // ResponderError for permanent ones.
  virtual std::string complete(const CompletionRequest& request) = 0;
  // False makes the harness issue requests one at a time.
  virtual bool concurrent_safe() const { return true; }
  virtual std::string name() const = 0;
};

// Answer = likert.min + (FNV-1a of seed bytes then prompt bytes) mod points.
class MockResponder : public Responder {
 public:
  explicit MockResponder(std::uint64_t seed, LikertScale likert = {});
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "mock"; }

  static int answer_for(std::uint64_t seed, std::string_view prompt, const LikertScale& likert);

 private:
  std::uint64_t seed_;
  LikertScale likert_;
};

class ConstantResponder : public Responder {
 public:
  explicit ConstantResponder(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const CompletionRequest&) override { return reply_; }
  std::string name() const override { return "constant"; }

 private:
  std::string reply_;
};

struct SimulationConfig {
  Method method = Method::Psi;
  double temperature = 0.0;
  int max_parallel = 4;
  int retries = 2;
  std::chrono::milliseconds backoff{200};  // doubled after each retry
  bool check_questions = false;
};

struct CellError {
  std::string subject_id;
  int item_id = 0;
  std::string reason;  // unparseable | transport | responder
  std::string message;
  int attempts = 0;
};

struct SimulationResult {
  ResponseMatrix matrix;  // Raw coding, NaN where a cell failed
  std::vector<CellError> errors;
  std::size_t requests = 0;
};

// One request per (subject, item). Throws ConfigError for invalid settings or
// profiles of another method, ProfileError for invalid profiles, and
// ResponderError when no cell could be obtained at all.
SimulationResult run_simulation(const std::vector<SubjectProfile>& profiles, const ScaleSpec& spec,
                                const SimulationConfig& cfg, Responder& responder);

}  // namespace psyeval
