#include "psyeval/simulate.hpp"

namespace psyeval {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

MockResponder::MockResponder(std::uint64_t seed, LikertScale likert) : seed_(seed), likert_(likert) {
  likert_.validate();
}

int MockResponder::answer_for(std::uint64_t seed, std::string_view prompt, const LikertScale& likert) {
  char seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xffU);
  const std::uint64_t h = fnv1a64(prompt, fnv1a64(std::string_view(seed_bytes, 8)));
  return likert.min + static_cast<int>(h % static_cast<std::uint64_t>(likert.points()));
}

std::string MockResponder::complete(const CompletionRequest& request) {
  return std::to_string(answer_for(seed_, request.prompt, likert_));
}

}  // namespace psyeval
