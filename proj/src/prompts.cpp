#include <algorithm>
#include <cctype>
#include <string>

#include "psyeval/errors.hpp"
#include "psyeval/simulate.hpp"

namespace psyeval {

const std::array<std::string_view, kPsiQuestionCount>& psi_questions() {
  static const std::array<std::string_view, kPsiQuestionCount> questions = {
      "To get us started, where are you from? Where did you grow up and what was the place like?",
      "Thinking back, what kind of student were you in school?",
      "Did you have a teacher or teachers that were influential? If so, why? What were they like?",
      "What was your favorite subject in school, and why?",
      "What was your least favorite subject in school, and why?",
      "Still thinking back, who were your heroes when you were young and why?",
      "When you were little, what did you want to be when you grew up? And why?",
      "What were your dreams and plans when you graduated from high school? What made you have those dreams or plans?",
      "If you had complete freedom, what would your dream job be, and why?",
      "How have your dreams and goals changed throughout your life?",
      "Shifting gears to your childhood, how would you describe the personalities of people in the family you grew up in? For example, what were your parents and/or siblings like?",
      "How are you similar or different from your parents and/or siblings?",
      "How do you think your similarities and/or differences influenced your relationship with them?",
      "What was the best part of your childhood?",
      "What do you think were the worst parts of your childhood?",
      "Switching gears a little bit, what was your first paid job? How old were you then? (If this is not applicable to you, then please put 'NA')",
      "What other jobs have you had? (If this is not applicable to you, then please put 'NA')",
      "What do you do now for a living? And why did you choose it?",
      "Please describe your typical work day.",
      "What is the best and worst part of your current work?",
      "Did you serve in the military? Please tell us about that experience, what was the best and worst part of it?",
      "Moving on, what are your adult friendships like?",
      "How are your adult friendships different from your childhood friendships?",
      "What are your strongest qualities as a friend? In other words, what makes you a great friend to have?",
      "What about your weakest qualities in friendships? In other words, what do you struggle with when you are trying to be a friend to someone?",
      "Moving onto more general questions, when thinking about your life in general, what are you most proud of?",
      "What hobbies or other interests do you have?",
      "What things frighten you now?",
      "What were some things that frightened you most as a child?",
      "What are the three biggest news events that have occurred in your lifetime?",
      "If you had the power to solve one and only one problem in the world, what would it be, and why?",
      "Tell me about a time when you did not know if you would make it. How did you overcome that challenge?",
  };
  return questions;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

void require_subject(const std::string& id) {
  if (trim(id).empty()) throw ProfileError("profile has an empty subject id");
}

}  // namespace

InterviewTranscript InterviewTranscript::without_question(int k) const {
  if (k < 1 || k > static_cast<int>(kPsiQuestionCount)) {
    throw ArgumentError("question index " + std::to_string(k) + " outside 1..32");
  }
  InterviewTranscript out = *this;
  if (std::find(out.omitted.begin(), out.omitted.end(), k) == out.omitted.end()) {
    out.omitted.push_back(k);
    std::sort(out.omitted.begin(), out.omitted.end());
  }
  return out;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Psi: return "psi";
    case Method::Persona: return "persona";
    case Method::Shape: return "shape";
  }
  return "psi";
}

Method parse_method(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "psi") return Method::Psi;
  if (t == "persona") return Method::Persona;
  if (t == "shape") return Method::Shape;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected psi, persona or shape)");
}

const std::string& subject_id_of(const SubjectProfile& profile) {
  return std::visit([](const auto& p) -> const std::string& { return p.subject_id; }, profile);
}

Method method_of(const SubjectProfile& profile) {
  switch (profile.index()) {
    case 0: return Method::Psi;
    case 1: return Method::Persona;
    default: return Method::Shape;
  }
}

void validate_profile(const SubjectProfile& profile, bool check_questions) {
  if (const auto* t = std::get_if<InterviewTranscript>(&profile)) {
    require_subject(t->subject_id);
    if (t->qa.size() != kPsiQuestionCount) {
      throw ProfileError("transcript " + t->subject_id + " has " + std::to_string(t->qa.size()) +
                         " question-answer pairs, expected 32");
    }
    for (int k : t->omitted) {
      if (k < 1 || k > static_cast<int>(kPsiQuestionCount)) {
        throw ProfileError("transcript " + t->subject_id + " omits invalid question " + std::to_string(k));
      }
    }
    if (t->omitted.size() >= kPsiQuestionCount) {
      throw ProfileError("transcript " + t->subject_id + " omits every question");
    }
    if (check_questions) {
      for (std::size_t i = 0; i < kPsiQuestionCount; ++i) {
        if (trim(t->qa[i].question) != psi_questions()[i]) {
          throw ProfileError("transcript " + t->subject_id + " question " + std::to_string(i + 1) +
                             " does not match the interview protocol");
        }
      }
    }
  } else if (const auto* p = std::get_if<PersonaProfile>(&profile)) {
    require_subject(p->subject_id);
    if (p->sentences.size() != 5) {
      throw ProfileError("persona " + p->subject_id + " has " + std::to_string(p->sentences.size()) +
                         " sentences, expected 5");
    }
    for (const auto& s : p->sentences) {
      if (trim(s).empty()) throw ProfileError("persona " + p->subject_id + " has an empty sentence");
    }
  } else {
    const auto& s = std::get<ShapeProfile>(profile);
    require_subject(s.subject_id);
    if (s.markers.size() != 5) {
      throw ProfileError("shape profile " + s.subject_id + " has " + std::to_string(s.markers.size()) +
                         " markers, expected 5");
    }
    if (s.level < 1 || s.level > 9) {
      throw ProfileError("shape profile " + s.subject_id + " level " + std::to_string(s.level) +
                         " outside 1..9");
    }
    for (const auto& m : s.markers) {
      if (trim(m.low).empty() || trim(m.high).empty()) {
        throw ProfileError("shape profile " + s.subject_id + " has an empty adjective");
      }
    }
  }
}

std::string shape_qualifier(const ShapeMarker& marker, int level) {
  const std::string low = trim(marker.low);
  const std::string high = trim(marker.high);
  switch (level) {
    case 1: return "extremely " + low;
    case 2: return "very " + low;
    case 3: return low;
    case 4: return "a bit " + low;
    case 5: return "neither " + low + " nor " + high;
    case 6: return "a bit " + high;
    case 7: return high;
    case 8: return "very " + high;
    case 9: return "extremely " + high;
    default: throw ProfileError("shape level " + std::to_string(level) + " outside 1..9");
  }
}

std::string render_description(const SubjectProfile& profile) {
  validate_profile(profile);
  std::string d;
  if (const auto* t = std::get_if<InterviewTranscript>(&profile)) {
    for (std::size_t i = 0; i < t->qa.size(); ++i) {
      const int k = static_cast<int>(i) + 1;
      if (std::find(t->omitted.begin(), t->omitted.end(), k) != t->omitted.end()) continue;
      d += "Q: " + trim(t->qa[i].question) + "\nA: " + trim(t->qa[i].answer) + "\n";
    }
  } else if (const auto* p = std::get_if<PersonaProfile>(&profile)) {
    for (std::size_t i = 0; i < p->sentences.size(); ++i) {
      if (i > 0) d += ' ';
      d += trim(p->sentences[i]);
    }
  } else {
    const auto& s = std::get<ShapeProfile>(profile);
    d = "You are ";
    for (std::size_t i = 0; i < s.markers.size(); ++i) {
      if (i > 0) d += (i + 1 == s.markers.size()) ? ", and " : ", ";
      d += shape_qualifier(s.markers[i], s.level);
    }
    d += '.';
  }
  return d;
}

std::string build_prompt(std::string_view description, const ItemDef& item, const LikertScale& likert) {
  if (trim(description).empty()) throw ProfileError("personality description is empty");
  std::string text(kBaseTemplate);
  text += '\n';
  text += description;
  if (text.back() != '\n') text += '\n';
  text += "\nStatement: " + item.text + "\n";
  text += "Rate how much you agree with the statement above using this scale:\n";
  if (likert.min == 1 && likert.max == 5) {
    text +=
        "1 = \"Strongly disagree\"\n"
        "2 = \"Somewhat disagree\"\n"
        "3 = \"Neither agree nor disagree\"\n"
        "4 = \"Somewhat agree\"\n"
        "5 = \"Strongly agree\"\n";
  } else {
    text += std::to_string(likert.min) + " = \"Strongly disagree\"\n";
    text += std::to_string(likert.max) + " = \"Strongly agree\"\n";
  }
  text += "Respond with a single integer from " + std::to_string(likert.min) + " to " +
          std::to_string(likert.max) + ".";
  return text;
}

int parse_likert_response(std::string_view reply, const LikertScale& likert) {
  const std::size_t n = reply.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_digit(reply[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_digit(reply[j])) ++j;
    const bool glued_before = i > 0 && (is_alnum(reply[i - 1]) || reply[i - 1] == '-' || reply[i - 1] == '.');
    const bool glued_after = j < n && (is_alnum(reply[j]) || (reply[j] == '.' && j + 1 < n && is_digit(reply[j + 1])));
    if (!glued_before && !glued_after && j - i <= 6) {
      const int value = std::stoi(std::string(reply.substr(i, j - i)));
      if (value >= likert.min && value <= likert.max) return value;
    }
    i = j;
  }
  std::string shown(reply.substr(0, 80));
  throw UnparseableResponseError("no rating between " + std::to_string(likert.min) + " and " +
                                 std::to_string(likert.max) + " in reply \"" + shown + "\"");
}

}  // namespace psyeval
