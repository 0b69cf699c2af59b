#include "semflow/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "semflow/errors.hpp"

namespace semflow {
namespace {

struct VariantWork {
  VariantAggregate agg;
  int last_sub = -1;
  std::map<std::string, int> facet_last_sub;
};

bool known_kind(const Analysis& analysis, const std::string& kind) {
  if (is_known_error_kind(kind)) return true;
  for (const auto& s : analysis.submissions) {
    for (const auto& l : s.lines) {
      if (l.label.kind == kind) return true;
    }
  }
  return false;
}

}  // namespace

std::string Rgb::hex() const {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out = "#";
  for (std::uint8_t c : {r, g, b}) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

std::optional<Rgb> Rgb::parse(std::string_view hex) {
  if (hex.size() != 7 || hex[0] != '#') return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::uint8_t out[3];
  for (int i = 0; i < 3; ++i) {
    const int hi = nibble(hex[1 + 2 * i]);
    const int lo = nibble(hex[2 + 2 * i]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return Rgb{out[0], out[1], out[2]};
}

Rgb ColorScale::at(double ratio) const {
  const double t = std::clamp(ratio, 0.0, 1.0);
  auto lerp = [t](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * t));
  };
  return {lerp(incorrect.r, correct.r), lerp(incorrect.g, correct.g), lerp(incorrect.b, correct.b)};
}

const VariantEntry* Analysis::find_variant(const VariantId& id) const {
  auto it = std::lower_bound(variants.begin(), variants.end(), id,
                             [](const VariantEntry& e, const VariantId& v) { return e.id < v; });
  return (it != variants.end() && it->id == id) ? &*it : nullptr;
}

bool matches(const AnalyzedSubmission& sub, const FilterTerm& term) {
  for (const auto& l : sub.lines) {
    if (l.variant != term.variant) continue;
    if (!term.error_kind || l.label.kind == *term.error_kind) return true;
  }
  return false;
}

std::vector<bool> active_set(const Analysis& analysis, const FilterStack& stack) {
  std::vector<bool> active(analysis.submissions.size(), true);
  for (std::size_t i = 0; i < active.size(); ++i) {
    for (const auto& term : stack) {
      if (!matches(analysis.submissions[i], term)) {
        active[i] = false;
        break;
      }
    }
  }
  return active;
}

ViewModel build_viewmodel(const Analysis& analysis, const ColorScale& colors) {
  return build_viewmodel(analysis, std::vector<bool>(analysis.submissions.size(), true), colors);
}

ViewModel build_viewmodel(const Analysis& analysis, const std::vector<bool>& active,
                          const ColorScale& colors) {
  ViewModel vm;
  vm.total_submissions = static_cast<int>(analysis.submissions.size());
  std::vector<std::map<VariantId, VariantWork>> work(analysis.steps.size());

  for (std::size_t s = 0; s < analysis.submissions.size(); ++s) {
    if (!active[s]) continue;
    ++vm.active_submissions;
    const int sub = static_cast<int>(s);
    for (const AnalyzedLine& line : analysis.submissions[s].lines) {
      if (line.step < 0 || line.step >= static_cast<int>(work.size())) continue;
      VariantWork& w = work[line.step][line.variant];
      w.agg.member_lines++;
      if (line.label.cls == ErrorClass::Correct) {
        w.agg.correct++;
      } else {
        w.agg.incorrect++;
        int& last = w.facet_last_sub.try_emplace(line.label.kind, -1).first->second;
        if (last != sub) {
          last = sub;
          w.agg.error_facets[line.label.kind]++;
        }
      }
      if (w.last_sub != sub) {
        w.last_sub = sub;
        w.agg.submission_count++;
      }
    }
  }

  vm.steps.reserve(analysis.steps.size());
  for (const StepInfo& info : analysis.steps) {
    StepAggregate step;
    step.id = info.id;
    step.tag = info.tag;
    step.display_label = info.label;
    for (auto& [id, w] : work[info.id]) {
      w.agg.id = id;
      if (const VariantEntry* v = analysis.find_variant(id)) w.agg.display = v->display;
      step.member_lines += w.agg.member_lines;
      step.correct += w.agg.correct;
      step.incorrect += w.agg.incorrect;
      step.variants.push_back(std::move(w.agg));
    }
    std::sort(step.variants.begin(), step.variants.end(),
              [](const VariantAggregate& a, const VariantAggregate& b) {
                if (a.member_lines != b.member_lines) return a.member_lines > b.member_lines;
                if (a.display != b.display) return a.display < b.display;
                return a.id < b.id;
              });
    step.ratio = step.member_lines > 0
                     ? static_cast<double>(step.correct) / static_cast<double>(step.member_lines)
                     : 0.0;
    step.color = colors.at(step.ratio);
    vm.steps.push_back(std::move(step));
  }
  return vm;
}

void validate_term(const Analysis& analysis, const FilterTerm& term) {
  if (analysis.find_variant(term.variant) == nullptr) throw UnknownVariant(term.variant.str());
  if (term.error_kind && !known_kind(analysis, *term.error_kind)) {
    throw UnknownErrorKind(*term.error_kind);
  }
}

Explorer::Explorer(const Analysis& analysis, ViewOptions opts)
    : analysis_(&analysis), opts_(opts) {
  refresh();
}

void Explorer::refresh() {
  active_ = active_set(*analysis_, stack_);
  view_ = build_viewmodel(*analysis_, active_, opts_.colors);
  view_.stack = stack_;
}

const ViewModel& Explorer::push(const FilterTerm& term) {
  validate_term(*analysis_, term);
  stack_.push_back(term);
  refresh();
  return view_;
}

const ViewModel& Explorer::pop() {
  if (stack_.empty()) throw EmptyStack();
  stack_.pop_back();
  refresh();
  return view_;
}

const ViewModel& Explorer::clear() {
  stack_.clear();
  refresh();
  return view_;
}

SubmissionPage list_submissions(const Analysis& analysis, const std::vector<bool>& active,
                                const VariantId& variant,
                                const std::optional<std::string>& error_kind, int page,
                                std::size_t page_size) {
  validate_term(analysis, {variant, error_kind});
  SubmissionPage out;
  out.variant = variant;
  out.error_kind = error_kind;
  out.page = std::max(page, 0);
  out.page_size = static_cast<int>(std::max<std::size_t>(page_size, 1));

  std::vector<std::size_t> hits;
  for (std::size_t s = 0; s < analysis.submissions.size(); ++s) {
    if (!active[s]) continue;
    const auto& sub = analysis.submissions[s];
    bool in_variant = false;
    bool kind_hit = false;
    std::set<std::string> kinds;
    for (const auto& l : sub.lines) {
      if (l.variant != variant) continue;
      in_variant = true;
      if (l.label.cls != ErrorClass::Correct) kinds.insert(l.label.kind);
      if (error_kind && l.label.kind == *error_kind) kind_hit = true;
    }
    if (!in_variant) continue;
    for (const auto& k : kinds) out.error_facets[k]++;
    if (!error_kind || kind_hit) hits.push_back(s);
  }
  std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
    return analysis.submissions[a].id < analysis.submissions[b].id;
  });
  out.total = static_cast<int>(hits.size());

  const std::size_t begin = static_cast<std::size_t>(out.page) * out.page_size;
  for (std::size_t i = begin; i < hits.size() && i < begin + out.page_size; ++i) {
    const auto& sub = analysis.submissions[hits[i]];
    SubmissionEntry e;
    e.id = sub.id;
    e.passed = sub.passed;
    e.source = sub.source;
    for (std::size_t j = 0; j < sub.lines.size(); ++j) {
      const auto& l = sub.lines[j];
      if (l.variant != variant) continue;
      if (error_kind && l.label.kind != *error_kind) continue;
      e.highlights.push_back({static_cast<int>(j), l.start_line, l.end_line, l.label});
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

namespace {

nlohmann::json label_json(const LineErrorLabel& l) {
  return {{"class", to_string(l.cls)},
          {"kind", l.kind},
          {"message", l.message},
          {"source", to_string(l.source)}};
}

}  // namespace

nlohmann::json to_json(const FilterTerm& term) {
  nlohmann::json j = {{"variant_id", term.variant.str()}};
  if (term.error_kind) j["error_kind"] = *term.error_kind;
  return j;
}

nlohmann::json to_json(const ViewModel& vm) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : vm.steps) {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : s.variants) {
      variants.push_back({{"variant_id", v.id.str()},
                          {"display", v.display},
                          {"member_lines", v.member_lines},
                          {"correct", v.correct},
                          {"incorrect", v.incorrect},
                          {"submission_count", v.submission_count},
                          {"error_facets", v.error_facets}});
    }
    steps.push_back({{"step_id", s.id},
                     {"tag", s.tag},
                     {"display_label", s.display_label},
                     {"member_lines", s.member_lines},
                     {"correct", s.correct},
                     {"incorrect", s.incorrect},
                     {"ratio", s.ratio},
                     {"color", s.color.hex()},
                     {"variants", std::move(variants)}});
  }
  nlohmann::json stack = nlohmann::json::array();
  for (const auto& t : vm.stack) stack.push_back(to_json(t));
  return {{"stack", std::move(stack)},
          {"total_submissions", vm.total_submissions},
          {"active_submissions", vm.active_submissions},
          {"steps", std::move(steps)}};
}

nlohmann::json to_json(const SubmissionPage& page) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : page.entries) {
    nlohmann::json hl = nlohmann::json::array();
    for (const auto& h : e.highlights) {
      hl.push_back({{"index", h.index},
                    {"start_line", h.start_line},
                    {"end_line", h.end_line},
                    {"label", label_json(h.label)}});
    }
    entries.push_back(
        {{"id", e.id}, {"passed", e.passed}, {"source", e.source}, {"highlights", std::move(hl)}});
  }
  nlohmann::json j = {{"variant_id", page.variant.str()},
                      {"total", page.total},
                      {"page", page.page},
                      {"page_size", page.page_size},
                      {"error_facets", page.error_facets},
                      {"entries", std::move(entries)}};
  j["error_kind"] = page.error_kind ? nlohmann::json(*page.error_kind) : nlohmann::json(nullptr);
  return j;
}

}  // namespace semflow
