#include "synth.hpp"

#include "semflow/lexer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <random>
#include <stdexcept>

namespace synth {
namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
bool chance(Rng& rng, double p) { return static_cast<double>(rng() % 1000000) < p * 1e6; }

template <typename T>
const T& pick_of(Rng& rng, const std::vector<T>& v) {
  return v[pick(rng, v.size())];
}

std::string fill(std::string tpl, const std::vector<std::pair<std::string, std::string>>& names) {
  for (const auto& [key, value] : names) {
    const std::string pat = "{" + key + "}";
    for (std::size_t at = tpl.find(pat); at != std::string::npos; at = tpl.find(pat, at)) {
      tpl.replace(at, pat.size(), value);
      at += value.size();
    }
  }
  return tpl;
}

struct Line {
  int depth = 0;
  std::string text;
  bool noise = false;
};

struct Choice {
  std::vector<std::string> good;
  std::vector<std::string> bad;
};

const std::vector<std::string> kNamePool = {
    "n",     "num",   "count_in", "size",  "k",     "total", "s",     "acc",   "result",
    "summ",  "i",     "j",        "idx",   "x",     "val",   "number", "item", "cnt",
    "pos",   "amount", "a",       "b",     "y",     "tmp",   "current", "value", "limit",
    "ans",   "res",   "q",        "t",     "m",     "z",     "p",      "w",     "entry"};

const std::vector<std::string> kComments = {"# read input", "# sum the positives",
                                            "# loop over values", "# TODO check edge cases",
                                            "# my solution", "# done"};

struct Program {
  std::vector<Line> lines;
  bool passed = true;
  int anchor = -1;  // index of the line that first assigns the accumulator
};

Program generate(Rng& rng, double bug_rate) {
  std::vector<std::string> pool = kNamePool;
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::vector<std::pair<std::string, std::string>> names = {
      {"n", pool[0]}, {"t", pool[1]}, {"i", pool[2]}, {"x", pool[3]},
      {"c", pool[4]}, {"xs", pool[5]}, {"y", pool[6]}};

  const bool buggy = chance(rng, bug_rate);
  const bool syntax_bug = buggy && chance(rng, 0.1);
  Program prog;
  int bug_slots = 0;
  std::vector<Line*> candidates;
  std::vector<std::pair<Line, Choice>> planned;

  auto add = [&](int depth, const Choice& c) {
    planned.push_back({Line{depth, pick_of(rng, c.good), false}, c});
  };
  auto noise = [&](int depth, const std::string& text) {
    planned.push_back({Line{depth, text, true}, Choice{}});
  };

  const bool wrap_main = chance(rng, 0.2);
  const int d = wrap_main ? 1 : 0;
  if (wrap_main) add(0, {{"def main():"}, {}});
  if (chance(rng, 0.3)) noise(d, pick_of(rng, kComments));

  if (chance(rng, 0.12)) {
    // Short form built on a comprehension.
    add(d, {{"{xs} = [int(input()) for _ in range(int(input()))]",
             "{xs} = [int(input()) for {y} in range(int(input()))]"},
            {"{xs} = [input() for _ in range(int(input()))]"}});
    add(d, {{"{t} = sum({y} for {y} in {xs} if {y} > 0)",
             "{t} = sum([{y} for {y} in {xs} if {y} > 0])"},
            {"{t} = sum({xs})", "{t} = sum({y} for {y} in {xs} if {y} < 0)"}});
    prog.anchor = static_cast<int>(planned.size()) - 1;
    noise(d, pick_of(rng, std::vector<std::string>{"print({t})", "print(\"Total:\", {t})"}));
  } else {
    const bool count = chance(rng, 0.35);
    const bool use_while = chance(rng, 0.15);
    add(d, {{"{n} = int(input())", "{n} = int(input().strip())", "{n} = int(input(\"How many? \"))"},
            {"{n} = input()"}});
    add(d, {{"{t} = 0", "{t} = 0", "{t} = int(0)"}, {"{t} = 1"}});
    prog.anchor = static_cast<int>(planned.size()) - 1;
    if (count) add(d, {{"{c} = 0"}, {}});
    if (use_while) {
      add(d, {{"{i} = 0"}, {}});
      add(d, {{"while {i} < {n}:"}, {"while {i} <= {n}:"}});
    } else {
      add(d, {{"for {i} in range({n}):", "for {i} in range(0, {n}):", "for {i} in range({n}):"},
              {"for {i} in range({n} - 1):", "for {i} in range(1, {n}):"}});
    }
    add(d + 1, {{"{x} = int(input())", "{x} = float(input())"}, {"{x} = input()"}});
    if (chance(rng, 0.1)) noise(d + 1, "print({x})");
    add(d + 1, {{"if {x} > 0:", "if {x} >= 1:", "if 0 < {x}:"}, {"if {x} < 0:", "if {x} != 0:"}});
    add(d + 2, {{"{t} += {x}", "{t} = {t} + {x}"}, {"{t} = {x}", "{t} += 1"}});
    if (count) add(d + 2, {{"{c} += 1"}, {"{c} = 1"}});
    if (chance(rng, 0.15)) {
      add(d + 1, {{"else:"}, {}});
      add(d + 2, {{"continue"}, {}});
    }
    if (use_while) add(d + 1, {{"{i} += 1"}, {"{i} = 1"}});
    noise(d, pick_of(rng, std::vector<std::string>{"print({t})", "print(\"Total:\", {t})",
                                                   "print(\"sum =\", {t})"}));
    if (count && chance(rng, 0.5)) noise(d, "print({t} / {c} if {c} else 0)  # average");
  }
  if (wrap_main) {
    noise(0, "");
    add(0, {{"main()"}, {}});
  }

  for (auto& [line, choice] : planned) {
    if (!line.noise && !choice.bad.empty()) candidates.push_back(&line);
  }
  if (buggy && !candidates.empty()) {
    Line* victim = candidates[pick(rng, candidates.size())];
    for (auto& [line, choice] : planned) {
      if (&line != victim) continue;
      if (syntax_bug) {
        if (line.text.back() == ':') {
          line.text.pop_back();
        } else if (line.text.back() == ')') {
          line.text.pop_back();
        } else {
          line.text += " +";
        }
      } else {
        line.text = pick_of(rng, choice.bad);
      }
      ++bug_slots;
    }
  }
  prog.passed = bug_slots == 0;
  for (auto& [line, _] : planned) {
    line.text = fill(line.text, names);
    prog.lines.push_back(line);
  }
  return prog;
}

std::string render(const std::vector<Line>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!l.text.empty()) out += std::string(static_cast<std::size_t>(l.depth) * 4, ' ') + l.text;
    out += "\n";
  }
  return out;
}

}  // namespace

int physical_lines(const std::string& source) {
  int n = static_cast<int>(std::count(source.begin(), source.end(), '\n'));
  if (!source.empty() && source.back() != '\n') ++n;
  return n;
}

semflow::Corpus make_corpus(const Options& opts) {
  Rng rng(opts.seed);
  semflow::Corpus corpus;
  corpus.exercise_id = "sum-positives";
  corpus.prompt_text = "Read n, then n integers, and print the sum of the positive ones.";
  for (std::size_t k = 0; k < opts.submissions; ++k) {
    for (int attempt = 0;; ++attempt) {
      Program p = generate(rng, opts.bug_rate);
      if (chance(rng, 0.25)) {
        p.lines.insert(p.lines.begin() + static_cast<long>(pick(rng, p.lines.size() + 1)),
                       Line{0, "", true});
      }
      const std::string src = render(p.lines);
      const int n = physical_lines(src);
      if (n < opts.min_lines || n > opts.max_lines) {
        if (attempt > 1000) throw std::runtime_error("synth: line bounds unsatisfiable");
        continue;
      }
      char id[32];
      std::snprintf(id, sizeof id, "s%05zu", k);
      corpus.submissions.push_back({id, src, p.passed, {}});
      break;
    }
  }
  return corpus;
}

Planted make_planted(std::size_t passed, std::size_t failed, std::uint64_t seed) {
  Rng rng(seed);
  Planted out;
  out.corpus.exercise_id = "planted";
  std::vector<Program> pool;
  while (pool.size() < passed) {
    Program p = generate(rng, 0.0);
    const int n = physical_lines(render(p.lines));
    if (n > 14) continue;
    out.corpus.submissions.push_back(
        {"p" + std::to_string(pool.size()), render(p.lines), true, {}});
    out.planted_raw_line.push_back(-1);
    pool.push_back(std::move(p));
  }
  for (std::size_t k = 0; k < failed; ++k) {
    Program p = pool[pick(rng, pool.size())];
    const Line& anchor = p.lines[static_cast<std::size_t>(p.anchor)];
    // The accumulator name is the first token of the anchor line.
    const std::string acc = anchor.text.substr(0, anchor.text.find(' '));
    Line planted{anchor.depth,
                 acc + " = " + acc + " * " + std::to_string(7919 + k) + " % 104729 ^ 31", false};
    p.lines.insert(p.lines.begin() + p.anchor + 1, planted);
    out.corpus.submissions.push_back({"f" + std::to_string(k), render(p.lines), false, {}});
    out.planted_raw_line.push_back(p.anchor + 1);
  }
  return out;
}

std::string mutate(const std::string& source, std::uint64_t seed,
                   const std::vector<std::string>& keep) {
  Rng rng(seed);
  const auto toks = semflow::lex(source);
  std::set<std::string> taken(keep.begin(), keep.end());
  for (const auto& t : toks) {
    if (t.kind == semflow::TokenKind::Identifier) taken.insert(t.text);
  }
  std::map<std::string, std::string> fresh;
  auto rename = [&](const std::string& name) -> const std::string& {
    auto it = fresh.find(name);
    if (it != fresh.end()) return it->second;
    static const char* kStems[] = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta",
                                   "theta", "iota", "kappa", "lam", "mu"};
    std::string candidate;
    do {
      candidate = std::string(kStems[pick(rng, 12)]) + "_" + std::to_string(rng() % 1000);
    } while (taken.contains(candidate));
    taken.insert(candidate);
    return fresh.emplace(name, candidate).first->second;
  };

  std::string out;
  std::size_t pos = 0;
  const semflow::Token* prev = nullptr;
  std::vector<bool> call_paren;  // per open bracket: does it open a call?
  for (std::size_t k = 0; k < toks.size(); ++k) {
    const auto& t = toks[k];
    if (t.text == "(" || t.text == "[" || t.text == "{") {
      call_paren.push_back(t.text == "(" && prev != nullptr &&
                           (prev->kind == semflow::TokenKind::Identifier || prev->text == ")" ||
                            prev->text == "]"));
    } else if ((t.text == ")" || t.text == "]" || t.text == "}") && !call_paren.empty()) {
      call_paren.pop_back();
    }
    if (t.begin < pos) continue;
    std::string gap = source.substr(pos, t.begin - pos);
    // Widen a single interior space now and then; leading indentation stays.
    const bool interior = prev != nullptr && prev->line == t.line &&
                          prev->kind != semflow::TokenKind::Indent &&
                          prev->kind != semflow::TokenKind::Newline;
    if (interior && gap == " " && chance(rng, 0.3)) gap = "   ";
    out += gap;
    std::string text = source.substr(t.begin, t.end - t.begin);
    const bool attribute = prev != nullptr && prev->text == ".";
    // Keyword-argument names are not user identifiers.
    const bool kwarg = !call_paren.empty() && call_paren.back() && k + 1 < toks.size() &&
                       toks[k + 1].text == "=";
    if (t.kind == semflow::TokenKind::Identifier && !attribute && !kwarg && !semflow::is_builtin(t.text) &&
        std::find(keep.begin(), keep.end(), t.text) == keep.end()) {
      text = rename(t.text);
    }
    out += text;
    pos = t.end;
    prev = &t;
  }
  out += source.substr(std::min(pos, source.size()));
  return out;
}

void write_corpus(const semflow::Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  semflow::write_jsonl(corpus, out);
}

}  // namespace synth
