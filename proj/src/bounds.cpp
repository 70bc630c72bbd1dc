#include "bcq/bounds.hpp"

#include <algorithm>
#include <deque>
#include <string>
#include <utility>

#include "bcq/error.hpp"

namespace bcq {

namespace {

BoundRow block_row(const SequenceModel& model, std::size_t b) {
  BoundRow row;
  row.block = b;
  row.block_label = model.block_label(b);
  return row;
}

bool skip_null_block(const SequenceModel& model, std::size_t b, BoundReport& rep) {
  if (!model.block_is_null(b)) return false;
  BoundRow row = block_row(model, b);
  row.verdict = Verdict::kInapplicable;
  row.note = "null block";
  rep.rows.push_back(std::move(row));
  return true;
}

std::string indexed(const std::string& stem, long n, const std::string& rest) {
  return stem + std::to_string(n) + rest;
}

// The exponent alpha with joint = base^alpha * rest, as a refined enclosure
// of log(joint/rest)/log(base). States: defined, degenerate (with the
// vanishing quantity named), or unresolvable at the precision cap.
struct CoeffData {
  enum class State { kOk, kUndefined, kInconclusive };
  State state = State::kUndefined;
  Enclosure alpha;
  bool alpha_one_exact = false;
  Rational base, joint, rest;
  std::string note;
};

CoeffData log_ratio_coefficient(const Rational& base, const Rational& joint,
                                const Rational& rest, const std::string& base_name,
                                const std::string& joint_name, const std::string& rest_name,
                                const Rational& target) {
  CoeffData out;
  out.base = base;
  out.joint = joint;
  out.rest = rest;
  if (rest.is_zero()) {
    out.note = rest_name + " = 0";
    return out;
  }
  if (joint.is_zero()) {
    out.note = joint_name + " = 0";
    return out;
  }
  if (base.is_zero()) {
    out.note = base_name + " = 0";
    return out;
  }
  if (base.is_one()) {
    out.note = base_name + " = 1";
    return out;
  }
  if (joint == base * rest) {
    out.state = CoeffData::State::kOk;
    out.alpha = Enclosure(Rational(1));
    out.alpha_one_exact = true;
    out.note = "defining relation exact at alpha = 1";
    return out;
  }
  if (joint == rest) {
    out.state = CoeffData::State::kOk;
    out.alpha = Enclosure(Rational(0));
    out.note = "defining relation exact at alpha = 0";
    return out;
  }
  const Rational ratio = joint / rest;
  Rational eps = min(target, Rational::pow10(-9)) / Rational(8);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Enclosure den = log_enclosure(base, eps);
    if (den.upper().sign() < 0) {
      Enclosure num = log_enclosure(ratio, eps);
      Enclosure alpha = num / den;
      if (alpha.width() <= target) {
        out.state = CoeffData::State::kOk;
        out.alpha = std::move(alpha);
        return out;
      }
    }
    eps /= Rational(1024);
  }
  out.state = CoeffData::State::kInconclusive;
  out.note = "precision cap reached while refining the coefficient";
  return out;
}

// Coefficient at index i, horizon H, on one block, built from model queries.
CoeffData block_coefficient(const SequenceModel& model, std::size_t b, long i, long H,
                            const Rational& target) {
  Rational base = Rational(1) - model.cond_marginal(i).value(b);
  Rational joint = model.run_probability(i, H).value(b);
  Rational rest = model.run_probability(i + 1, H).value(b);
  return log_ratio_coefficient(base, joint, rest, indexed("P(A_", i, "^c|F)"),
                               indexed("P(A_", i, "^c...A_" + std::to_string(H) + "^c|F)"),
                               indexed("P(A_", i + 1, "^c...A_" + std::to_string(H) + "^c|F)"),
                               target);
}

}  // namespace

GeneralizedBcResult generalized_bc_series(const SequenceModel& model, long m, long H) {
  if (m < 0) throw InvalidInput("gap m must be >= 0");
  if (H < 1) throw InvalidInput("horizon must be >= 1");
  const std::size_t B = model.block_count();

  BoundReport rep;
  rep.check_id = "generalized-bc";
  rep.relation =
      "S_H = sum_{n<=H} P(A_n^c...A_{n+m-1}^c A_{n+m}|F); series <= S_H + tail bound";
  rep.add_param("m", std::to_string(m));
  rep.add_param("H", std::to_string(H));

  std::vector<Rational> sums(B, Rational(0));
  std::vector<bool> mask(B, false);
  std::vector<std::optional<Rational>> tails(B);

  for (long n = 1; n <= H; ++n) {
    BlockFunction pat = model.pattern_probability(n, m);
    for (std::size_t b = 0; b < B; ++b) {
      if (!model.block_is_null(b)) sums[b] += pat.value(b);
    }
  }

  for (std::size_t b = 0; b < B; ++b) {
    if (model.block_is_null(b)) {
      mask[b] = true;
      BoundRow row = block_row(model, b);
      row.verdict = Verdict::kInapplicable;
      row.note = "null block";
      rep.rows.push_back(std::move(row));
      continue;
    }

    std::optional<Rational> tail;
    switch (model.kind()) {
      case SequenceModel::Kind::kMixtureBernoulli: {
        // Each pattern term is at most the marginal at its final index, so
        // the formula's own tail bound from H+m+1 covers the remainder.
        const ProbFormula& f = model.bernoulli_components()[b].p;
        tail = f.tail_upper_bound(H + m + 1);
        break;
      }
      case SequenceModel::Kind::kMixtureMarkov: {
        const MarkovComponent& c = model.markov_components()[b];
        if (m >= 1) {
          // Every pattern term carries one 0 -> 1 transition factor q0.
          if (c.q0.is_zero()) tail = Rational(0);
        } else if (c.q0.is_zero()) {
          if (c.pi1.is_zero()) {
            tail = Rational(0);
          } else if (c.q1 < Rational(1)) {
            tail = c.pi1 * c.q1.pow(H) / (Rational(1) - c.q1);
          }
        }
        break;
      }
      case SequenceModel::Kind::kExplicit: {
        Rational rest(0);
        const long last = *model.max_index() - m;
        for (long n = H + 1; n <= last; ++n) {
          rest += model.pattern_probability(n, m).value(b);
        }
        tail = rest;
        break;
      }
    }
    tails[b] = tail;

    BoundRow row = block_row(model, b);
    row.premise_ok = marginals_vanish(model, b);
    if (row.premise_ok.has_value() && !*row.premise_ok) {
      row.verdict = Verdict::kInapplicable;
      row.lhs = Enclosure(sums[b]);
      row.note = "premise fails: P(A_n|F) does not tend to 0";
    } else if (!tail.has_value()) {
      row.verdict = Verdict::kInapplicable;
      row.lhs = Enclosure(sums[b]);
      row.note = "no closed-form tail bound for this family";
    } else {
      row.verdict = Verdict::kHolds;
      row.lhs = Enclosure(sums[b], sums[b] + *tail);
      row.note = model.kind() == SequenceModel::Kind::kExplicit
                     ? "finite family: remainder is exact"
                     : "series enclosed by the partial sum plus the tail bound";
    }
    rep.rows.push_back(std::move(row));
  }

  return GeneralizedBcResult{BlockFunction(std::move(sums), std::move(mask)),
                             std::move(tails), std::move(rep)};
}

BoundReport switch_identity_check(const SequenceModel& model, long N) {
  if (N < 1) throw InvalidInput("prefix length must be >= 1");
  const std::size_t B = model.block_count();

  BoundReport rep;
  rep.check_id = "switch-identity";
  rep.relation =
      "sum_{n<=N} P(A_n A_{n+1}^c|F) - sum_{n<=N} P(A_n^c A_{n+1}|F) == P(A_1|F) - "
      "P(A_{N+1}|F)";
  rep.add_param("N", std::to_string(N));

  std::vector<Rational> down(B, Rational(0)), up(B, Rational(0));
  BlockFunction first = model.cond_marginal(1);
  BlockFunction cur = first;
  for (long n = 1; n <= N; ++n) {
    BlockFunction next = model.cond_marginal(n + 1);
    BlockFunction joint = model.pairwise_joint(n, n + 1);
    for (std::size_t b = 0; b < B; ++b) {
      if (model.block_is_null(b)) continue;
      down[b] += cur.value(b) - joint.value(b);
      up[b] += next.value(b) - joint.value(b);
    }
    cur = std::move(next);
  }

  for (std::size_t b = 0; b < B; ++b) {
    if (skip_null_block(model, b, rep)) continue;
    BoundRow row = block_row(model, b);
    Rational lhs = down[b] - up[b];
    Rational rhs = first.value(b) - cur.value(b);
    row.lhs = Enclosure(lhs);
    row.rhs = Enclosure(rhs);
    row.margin = lhs - rhs;
    row.verdict = lhs == rhs ? Verdict::kHolds : Verdict::kViolated;
    row.note = "switch-down sum " + down[b].str() + ", switch-up sum " + up[b].str();
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

bool power_relation_holds(const Rational& base, const Rational& joint, const Rational& rest,
                          const Rational& alpha) {
  if (base.sign() <= 0 || joint.sign() <= 0 || rest.sign() <= 0) {
    throw InvalidInput("power relation requires positive probabilities");
  }
  const mpq_class& a = alpha.raw();
  if (!a.get_num().fits_slong_p() || !a.get_den().fits_slong_p()) {
    throw InvalidInput("candidate exponent is too large");
  }
  long p = a.get_num().get_si();
  long q = a.get_den().get_si();
  if (p >= 0) return joint.pow(q) == base.pow(p) * rest.pow(q);
  return joint.pow(q) * base.pow(-p) == rest.pow(q);
}

PowerCoefficientResult power_coefficient(const SequenceModel& model, long n, long H,
                                         const Rational& width) {
  if (n < 1) throw InvalidInput("index n must be >= 1");
  if (H <= n) throw InvalidInput("horizon must exceed n");
  if (width.sign() <= 0) throw InvalidInput("enclosure width must be positive");

  PowerCoefficientResult out;
  out.n = n;
  out.horizon = H;
  out.report.check_id = "power-coefficient";
  out.report.relation =
      "alpha with P(A_n^c...A_H^c|F) = P(A_n^c|F)^alpha * P(A_{n+1}^c...A_H^c|F)";
  out.report.add_param("n", std::to_string(n));
  out.report.add_param("H", std::to_string(H));
  out.report.add_param("width", width.str());

  for (std::size_t b = 0; b < model.block_count(); ++b) {
    CoefficientBlock cb;
    if (model.block_is_null(b)) {
      cb.note = "null block";
      out.blocks.push_back(std::move(cb));
      skip_null_block(model, b, out.report);
      continue;
    }
    CoeffData cd = block_coefficient(model, b, n, H, width);
    if (cd.state == CoeffData::State::kUndefined) {
      throw UndefinedCoefficient(cd.note + " on block " + model.block_label(b));
    }
    cb.base = cd.base;
    cb.joint = cd.joint;
    cb.rest = cd.rest;
    cb.note = cd.note;
    BoundRow row = block_row(model, b);
    if (cd.state == CoeffData::State::kInconclusive) {
      cb.verdict = Verdict::kInconclusive;
      row.verdict = Verdict::kInconclusive;
      row.note = cd.note;
    } else {
      cb.verdict = Verdict::kHolds;
      cb.alpha = cd.alpha;
      cb.alpha_one_exact = cd.alpha_one_exact;
      row.verdict = Verdict::kHolds;
      row.lhs = cd.alpha;
      row.note = cd.note;
    }
    out.blocks.push_back(std::move(cb));
    out.report.rows.push_back(std::move(row));
  }
  return out;
}

MarkovCoefficientResult markov_power_coefficient(const SequenceModel& model, long n,
                                                 const Rational& width) {
  if (model.kind() != SequenceModel::Kind::kMixtureMarkov) {
    throw InvalidInput("chain coefficient requires a markov mixture model");
  }
  if (n < 1) throw InvalidInput("index n must be >= 1");
  if (width.sign() <= 0) throw InvalidInput("enclosure width must be positive");

  MarkovCoefficientResult out;
  out.n = n;
  out.report.check_id = "markov-coefficient";
  out.report.relation =
      "complement form: exponent from P(A_n^c A_{n+1}^c|F); displayed form: exponent from "
      "P(A_n^c A_{n+1}|F)";
  out.report.add_param("n", std::to_string(n));
  out.report.add_param("width", width.str());

  for (std::size_t b = 0; b < model.block_count(); ++b) {
    const MarkovComponent& c = model.markov_components()[b];
    Rational pi_n = model.markov_marginal(b, n);
    Rational pi_next = model.markov_marginal(b, n + 1);
    Rational base = Rational(1) - pi_n;

    CoeffData comp = log_ratio_coefficient(
        base, base * (Rational(1) - c.q0), Rational(1) - pi_next,
        indexed("P(A_", n, "^c|F)"), indexed("P(A_", n, "^c A_" + std::to_string(n + 1) + "^c|F)"),
        indexed("P(A_", n + 1, "^c|F)"), width);
    if (comp.state == CoeffData::State::kUndefined) {
      throw UndefinedCoefficient(comp.note + " (complement form) on block " +
                                 model.block_label(b));
    }
    CoeffData disp = log_ratio_coefficient(
        base, base * c.q0, pi_next, indexed("P(A_", n, "^c|F)"),
        indexed("P(A_", n, "^c A_" + std::to_string(n + 1) + "|F)"),
        indexed("P(A_", n + 1, "|F)"), width);
    if (disp.state == CoeffData::State::kUndefined) {
      throw UndefinedCoefficient(disp.note + " (displayed form) on block " +
                                 model.block_label(b));
    }

    MarkovCoefficientBlock mb;
    BoundRow row_c = block_row(model, b);
    row_c.note = "complement form";
    BoundRow row_d = block_row(model, b);
    row_d.note = "displayed form";
    if (comp.state == CoeffData::State::kOk) {
      mb.complement_form = comp.alpha;
      row_c.verdict = Verdict::kHolds;
      row_c.lhs = comp.alpha;
      if (!comp.note.empty()) row_c.note += "; " + comp.note;
    } else {
      row_c.verdict = Verdict::kInconclusive;
      row_c.note += "; " + comp.note;
    }
    if (disp.state == CoeffData::State::kOk) {
      mb.displayed_form = disp.alpha;
      row_d.verdict = Verdict::kHolds;
      row_d.lhs = disp.alpha;
      if (!disp.note.empty()) row_d.note += "; " + disp.note;
    } else {
      row_d.verdict = Verdict::kInconclusive;
      row_d.note += "; " + disp.note;
    }
    if (mb.complement_form && mb.displayed_form) {
      mb.disagree = !mb.complement_form->intersects(*mb.displayed_form);
      if (mb.disagree) row_d.note += "; forms disagree beyond enclosure width";
    }
    mb.verdict = row_c.verdict == Verdict::kHolds && row_d.verdict == Verdict::kHolds
                     ? Verdict::kHolds
                     : Verdict::kInconclusive;
    out.blocks.push_back(std::move(mb));
    out.report.rows.push_back(std::move(row_c));
    out.report.rows.push_back(std::move(row_d));
  }
  return out;
}

BoundReport theorem21_recursion_check(const SequenceModel& model, long n, long k, long H) {
  if (n < 1 || k < 1) throw InvalidInput("n and k must be >= 1");
  if (n + k > H) throw InvalidInput("need n + k <= H");

  BoundReport rep;
  rep.check_id = "recursion-product";
  rep.relation =
      "P(A_n^c...A_H^c|F) == prod_i P(A_i^c|F)^alpha_i * P(A_{n+k}^c...A_H^c|F), and <= "
      "exp(-sum_i alpha_i P(A_i|F)) * P(A_{n+k}^c...A_H^c|F)";
  rep.add_param("n", std::to_string(n));
  rep.add_param("k", std::to_string(k));
  rep.add_param("H", std::to_string(H));

  const Rational ladder_start = Rational::pow10(-9);
  for (std::size_t b = 0; b < model.block_count(); ++b) {
    if (skip_null_block(model, b, rep)) continue;

    Rational lhs_val = model.run_probability(n, H).value(b);
    Rational rest_val = model.run_probability(n + k, H).value(b);
    if (rest_val.is_zero()) {
      BoundRow row = block_row(model, b);
      row.verdict = Verdict::kInapplicable;
      row.note = "zero run probability beyond n + k";
      rep.rows.push_back(std::move(row));
      continue;
    }

    bool undefined = false;
    std::string undefined_note;
    std::vector<CoeffData> coeffs;
    std::vector<Rational> marginals;
    for (long i = n; i < n + k; ++i) {
      CoeffData cd = block_coefficient(model, b, i, H, ladder_start / Rational(4 * k));
      if (cd.state == CoeffData::State::kUndefined) {
        undefined = true;
        undefined_note = "coefficient undefined: " + cd.note;
        break;
      }
      coeffs.push_back(std::move(cd));
      marginals.push_back(model.cond_marginal(i).value(b));
    }
    if (undefined) {
      BoundRow row = block_row(model, b);
      row.verdict = Verdict::kInapplicable;
      row.note = undefined_note;
      rep.rows.push_back(std::move(row));
      continue;
    }

    // Product identity, checked in log space at shrinking widths.
    BoundRow ident = block_row(model, b);
    ident.note = "log-product identity";
    Rational eps = ladder_start / Rational(4 * (k + 2));
    for (int attempt = 0; attempt < 8; ++attempt) {
      Enclosure left = log_enclosure(lhs_val, eps);
      Enclosure right = log_enclosure(rest_val, eps);
      bool refine_coeff = false;
      for (long i = 0; i < k; ++i) {
        CoeffData& cd = coeffs[static_cast<std::size_t>(i)];
        if (cd.alpha.width() > eps && !cd.alpha.is_point()) {
          cd = log_ratio_coefficient(cd.base, cd.joint, cd.rest, "base", "joint", "rest", eps);
          if (cd.state != CoeffData::State::kOk) {
            refine_coeff = true;
            break;
          }
        }
        right = right + cd.alpha * log_enclosure(cd.base, eps);
      }
      if (refine_coeff) {
        ident.verdict = Verdict::kInconclusive;
        ident.note += "; precision cap reached";
        break;
      }
      Enclosure residual = left - right;
      if (!residual.contains_zero()) {
        ident.verdict = Verdict::kViolated;
        ident.lhs = left;
        ident.rhs = right;
        ident.note += "; residual excludes 0";
        break;
      }
      if (residual.width() <= ladder_start) {
        ident.verdict = Verdict::kHolds;
        ident.lhs = left;
        ident.rhs = right;
        ident.note += "; residual contains 0 at width " + residual.width().str();
        break;
      }
      ident.verdict = Verdict::kInconclusive;
      ident.note += attempt == 7 ? "; precision cap reached" : "";
      eps /= Rational(1024);
    }
    rep.rows.push_back(ident);

    // Exponential upper bound with a refined enclosure of exp(-sum).
    BoundRow expo = block_row(model, b);
    expo.note = "exponential upper bound";
    expo.verdict = Verdict::kInconclusive;
    const PrecisionLadder ladder = PrecisionLadder::standard();
    for (const Rational& w : ladder.widths()) {
      Enclosure total(Rational(0));
      bool coeff_ok = true;
      for (long i = 0; i < k; ++i) {
        CoeffData& cd = coeffs[static_cast<std::size_t>(i)];
        Rational want = w / Rational(4 * k);
        if (cd.alpha.width() > want && !cd.alpha.is_point()) {
          cd = log_ratio_coefficient(cd.base, cd.joint, cd.rest, "base", "joint", "rest", want);
          if (cd.state != CoeffData::State::kOk) {
            coeff_ok = false;
            break;
          }
        }
        total = total + cd.alpha * Enclosure(marginals[static_cast<std::size_t>(i)]);
      }
      if (!coeff_ok) break;
      Enclosure rhs = exp_enclosure(-total, w / Rational(4)) * Enclosure(rest_val);
      TriBool cmp = certainly_le(Enclosure(lhs_val), rhs);
      if (cmp == TriBool::kTrue) {
        expo.verdict = Verdict::kHolds;
        expo.lhs = Enclosure(lhs_val);
        expo.rhs = rhs;
        expo.margin = rhs.lower() - lhs_val;
        break;
      }
      if (cmp == TriBool::kFalse) {
        expo.verdict = Verdict::kViolated;
        expo.lhs = Enclosure(lhs_val);
        expo.rhs = rhs;
        expo.margin = rhs.upper() - lhs_val;
        break;
      }
    }
    if (expo.verdict == Verdict::kInconclusive) {
      expo.note += "; enclosure cannot separate the sides at the precision floor";
    }
    rep.rows.push_back(std::move(expo));
  }
  return rep;
}

WeightedSeriesResult weighted_divergence_series(const SequenceModel& model, long H) {
  if (H < 2) throw InvalidInput("horizon must be >= 2");

  WeightedSeriesResult out;
  out.report.check_id = "weighted-series";
  out.report.relation = "partial sum of alpha_n(H) * P(A_n|F) over n <= H-1";
  out.report.add_param("H", std::to_string(H));

  const Rational width = default_enclosure_width() / Rational(4 * (H - 1));
  for (std::size_t b = 0; b < model.block_count(); ++b) {
    if (model.block_is_null(b)) {
      out.partial_sums.emplace_back();
      out.skipped_terms.push_back(0);
      skip_null_block(model, b, out.report);
      continue;
    }
    Enclosure sum(Rational(0));
    long skipped = 0;
    std::string skip_note;
    for (long i = 1; i < H; ++i) {
      CoeffData cd = block_coefficient(model, b, i, H, width);
      if (cd.state != CoeffData::State::kOk) {
        ++skipped;
        if (skip_note.empty()) skip_note = "skipped at n=" + std::to_string(i) + ": " + cd.note;
        continue;
      }
      sum = sum + cd.alpha * Enclosure(model.cond_marginal(i).value(b));
    }
    BoundRow row = block_row(model, b);
    switch (marginal_series_nature(model, b)) {
      case SeriesNature::kDivergent:
        row.note = "diverging trend (marginal series divergent)";
        break;
      case SeriesNature::kConvergent:
        row.note = "bounded (marginal series convergent)";
        break;
      case SeriesNature::kFiniteFamily:
        row.note = "finite family";
        break;
    }
    if (skipped == H - 1) {
      row.verdict = Verdict::kInapplicable;
      row.note += "; every coefficient undefined (" + skip_note + ")";
      out.partial_sums.emplace_back();
    } else {
      row.verdict = Verdict::kHolds;
      row.lhs = sum;
      if (skipped > 0) {
        row.note += "; " + std::to_string(skipped) + " term(s) skipped (" + skip_note + ")";
      }
      out.partial_sums.emplace_back(std::move(sum));
    }
    out.skipped_terms.push_back(skipped);
    out.report.rows.push_back(std::move(row));
  }
  return out;
}

BoundReport chung_erdos(const SequenceModel& model, long n) {
  if (n < 1) throw InvalidInput("count n must be >= 1");

  BoundReport rep;
  rep.check_id = "chung-erdos";
  rep.relation =
      "P(U_{k<=n} A_k|F) >= (sum_{k<=n} P(A_k|F))^2 / sum_{i,k<=n} P(A_i A_k|F)";
  rep.add_param("n", std::to_string(n));

  BlockFunction unions = model.union_probability(1, n);
  for (std::size_t b = 0; b < model.block_count(); ++b) {
    if (skip_null_block(model, b, rep)) continue;
    CorrelationScanner sc(model, b);
    for (long j = 0; j < n; ++j) sc.advance();
    const Rational& s = sc.marginal_sum();
    const Rational& d = sc.double_sum();
    BoundRow row = block_row(model, b);
    if (d.is_zero()) {
      row.verdict = Verdict::kInapplicable;
      row.note = "denominator sum is zero";
      rep.rows.push_back(std::move(row));
      continue;
    }
    Rational lhs = unions.value(b);
    Rational rhs = s * s / d;
    row.lhs = Enclosure(lhs);
    row.rhs = Enclosure(rhs);
    row.margin = lhs - rhs;
    row.verdict = lhs >= rhs ? Verdict::kHolds : Verdict::kViolated;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

SecondMomentResult second_moment_ratio(const SequenceModel& model, long n) {
  if (n < 1) throw InvalidInput("count n must be >= 1");

  SecondMomentResult out;
  out.report.check_id = "second-moment";
  out.report.relation = "sum_{i,k<=n} P(A_i A_k|F) / (sum_{k<=n} P(A_k|F))^2 >= 1";
  out.report.add_param("n", std::to_string(n));

  const std::size_t B = model.block_count();
  std::vector<Rational> vals(B, Rational(0));
  // The mask also covers blocks whose marginal sum vanishes, where the ratio
  // is undefined.
  std::vector<bool> mask(B, false);
  for (std::size_t b = 0; b < B; ++b) {
    if (model.block_is_null(b)) {
      mask[b] = true;
      skip_null_block(model, b, out.report);
      continue;
    }
    CorrelationScanner sc(model, b);
    for (long j = 0; j < n; ++j) sc.advance();
    const Rational& s = sc.marginal_sum();
    const Rational& d = sc.double_sum();
    BoundRow row = block_row(model, b);
    if (s.is_zero()) {
      mask[b] = true;
      row.verdict = Verdict::kInapplicable;
      row.note = "marginal sum is zero";
      out.report.rows.push_back(std::move(row));
      continue;
    }
    Rational ratio = d / (s * s);
    vals[b] = ratio;
    row.lhs = Enclosure(ratio);
    row.rhs = Enclosure(Rational(1));
    row.margin = ratio - Rational(1);
    row.verdict = ratio >= Rational(1) ? Verdict::kHolds : Verdict::kViolated;
    out.report.rows.push_back(std::move(row));
  }
  out.ratios = BlockFunction(std::move(vals), std::move(mask));
  return out;
}

BoundReport first_bc_quantitative(const SequenceModel& model, const RateFunction& phi,
                                  long l, long m) {
  if (l < 0) throw InvalidInput("level must be >= 0");
  if (m < 1) throw InvalidInput("horizon must be >= 1");
  if (phi.block_count() != model.block_count()) {
    throw InvalidInput("rate table block count does not match the model");
  }

  BoundReport rep;
  rep.check_id = "first-bc";
  rep.relation = "P(U_{i=phi(l)}^{m} A_i|F) <= 2^-l, given sum_{i=phi(l)}^{m} P(A_i|F) <= 2^-l";
  rep.add_param("l", std::to_string(l));
  rep.add_param("m", std::to_string(m));
  const Rational threshold = Rational::pow2(-l);

  for (std::size_t b = 0; b < model.block_count(); ++b) {
    if (skip_null_block(model, b, rep)) continue;
    BoundRow row = block_row(model, b);
    std::optional<long> idx = phi.at(b, l);
    if (!idx) {
      row.verdict = Verdict::kInapplicable;
      const RateTable& t = phi.table(b);
      row.note = t.status == RateStatus::kInapplicable
                     ? "rate inapplicable: " + t.provenance
                     : "rate table has no entry at this level";
      rep.rows.push_back(std::move(row));
      continue;
    }
    if (m <= *idx) {
      row.verdict = Verdict::kInapplicable;
      row.note = "horizon m does not exceed phi(l) = " + std::to_string(*idx);
      rep.rows.push_back(std::move(row));
      continue;
    }
    MarginalScanner sc(model, b);
    Rational before(0);
    for (long i = 1; i <= m; ++i) {
      sc.advance();
      if (i == *idx - 1) before = sc.partial_sum();
    }
    Rational premise_sum = sc.partial_sum() - before;
    row.premise_ok = premise_sum <= threshold;
    row.note = "phi(l) = " + std::to_string(*idx) + ", premise sum = " + premise_sum.str();
    if (!*row.premise_ok) {
      row.verdict = Verdict::kInapplicable;
      row.note += " > 2^-l: premise violated";
      rep.rows.push_back(std::move(row));
      continue;
    }
    Rational u = model.union_probability(*idx, m).value(b);
    row.lhs = Enclosure(u);
    row.rhs = Enclosure(threshold);
    row.margin = threshold - u;
    row.verdict = u <= threshold ? Verdict::kHolds : Verdict::kViolated;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

BoundReport second_bc_quantitative(const SequenceModel& model, const RateFunction& psi,
                                   long n, long N) {
  if (n < 1) throw InvalidInput("start n must be >= 1");
  if (N < 1) throw InvalidInput("level N must be >= 1");
  if (psi.block_count() != model.block_count()) {
    throw InvalidInput("rate table block count does not match the model");
  }

  const long M = n + N - 1;
  BoundReport rep;
  rep.check_id = "second-bc";
  rep.relation = "P(U_{i=n}^{psi(n+N-1)} A_i|F) >= 1 - e^-N";
  rep.add_param("n", std::to_string(n));
  rep.add_param("N", std::to_string(N));
  rep.add_param("M", std::to_string(M));

  for (std::size_t b = 0; b < model.block_count(); ++b) {
    if (skip_null_block(model, b, rep)) continue;
    BoundRow row = block_row(model, b);
    if (model.kind() != SequenceModel::Kind::kMixtureBernoulli) {
      row.verdict = Verdict::kInapplicable;
      row.note = "model is not a bernoulli mixture: the conditional independence hypothesis "
                 "is unmet";
      rep.rows.push_back(std::move(row));
      continue;
    }
    std::optional<long> idx = psi.at(b, M);
    if (!idx) {
      row.verdict = Verdict::kInapplicable;
      const RateTable& t = psi.table(b);
      row.note = t.status == RateStatus::kInapplicable
                     ? "rate inapplicable: " + t.provenance
                     : "rate table has no entry at level " + std::to_string(M);
      rep.rows.push_back(std::move(row));
      continue;
    }
    if (*idx < n) {
      row.verdict = Verdict::kInapplicable;
      row.note = "psi(M) = " + std::to_string(*idx) + " lies below the start n";
      rep.rows.push_back(std::move(row));
      continue;
    }
    MarginalScanner sc(model, b);
    for (long i = 0; i < *idx; ++i) sc.advance();
    row.premise_ok = sc.partial_sum() >= Rational(M);
    row.note = "psi(M) = " + std::to_string(*idx) + ", premise sum = " + sc.partial_sum().str();
    if (!*row.premise_ok) {
      row.verdict = Verdict::kInapplicable;
      row.note += " < M: premise violated";
      rep.rows.push_back(std::move(row));
      continue;
    }

    const PrecisionLadder ladder = PrecisionLadder::standard();
    auto compare_union = [&](long from, BoundRow& target) {
      Rational u = model.union_probability(from, *idx).value(b);
      target.verdict = Verdict::kInconclusive;
      for (const Rational& w : ladder.widths()) {
        Enclosure rhs = Enclosure(Rational(1)) - exp_enclosure(Rational(-N), w);
        TriBool cmp = certainly_ge(Enclosure(u), rhs);
        if (cmp == TriBool::kTrue) {
          target.verdict = Verdict::kHolds;
          target.lhs = Enclosure(u);
          target.rhs = rhs;
          target.margin = u - rhs.upper();
          return;
        }
        if (cmp == TriBool::kFalse) {
          target.verdict = Verdict::kViolated;
          target.lhs = Enclosure(u);
          target.rhs = rhs;
          target.margin = u - rhs.lower();
          return;
        }
      }
      target.note += "; enclosure cannot separate the sides at the precision floor";
    };

    row.note += ", union over " + std::to_string(n) + ".." + std::to_string(*idx);
    compare_union(n, row);
    rep.rows.push_back(row);
    if (n > 1) {
      BoundRow wide = block_row(model, b);
      wide.premise_ok = row.premise_ok;
      wide.note = "union over 1.." + std::to_string(*idx);
      compare_union(1, wide);
      rep.rows.push_back(std::move(wide));
    }
  }
  return rep;
}

ErdosRenyiResult erdos_renyi_schedule(const SequenceModel& model, const RateFunction& psi,
                                      const CorrelationRate& phi2, long n, long l) {
  if (n < 1) throw InvalidInput("start n must be >= 1");
  if (l < 0) throw InvalidInput("level must be >= 0");
  if (psi.block_count() != model.block_count()) {
    throw InvalidInput("rate table block count does not match the model");
  }
  if (&phi2.model() != &model) {
    throw InvalidInput("correlation rate was built for a different model");
  }

  ErdosRenyiResult out;
  out.report.check_id = "erdos-renyi";
  out.report.relation = "P(U_{i=n}^{n_m} A_i|F) >= 1 - 2^-l";
  out.report.add_param("n", std::to_string(n));
  out.report.add_param("l", std::to_string(l));
  const Rational rhs = Rational(1) - Rational::pow2(-l);

  for (std::size_t b = 0; b < model.block_count(); ++b) {
    out.schedules.emplace_back();
    if (skip_null_block(model, b, out.report)) continue;
    BoundRow row = block_row(model, b);
    std::optional<long> psi2n = psi.at(b, 2 * n);
    if (!psi2n) {
      row.verdict = Verdict::kInapplicable;
      const RateTable& t = psi.table(b);
      row.note = t.status == RateStatus::kInapplicable
                     ? "rate inapplicable: " + t.provenance
                     : "rate table has no entry at level " + std::to_string(2 * n);
      out.report.rows.push_back(std::move(row));
      continue;
    }
    const long m = std::max(*psi2n, l + 3);
    std::vector<long> indices;
    indices.reserve(static_cast<std::size_t>(m));
    long prev = 0;
    std::string stall;
    for (long k = 1; k <= m; ++k) {
      const long start = k == 1 ? 1 : std::max(prev, k);
      CorrelationEntry e = phi2.at(b, k, start);
      if (e.status != RateStatus::kApplicable) {
        stall = "schedule stalls at level " + std::to_string(k) + ": " +
                rate_status_name(e.status);
        if (!e.note.empty()) stall += " (" + e.note + ")";
        break;
      }
      if (e.index < start || e.achieved_ratio > Rational(1) + Rational::pow2(-k)) {
        stall = "ratio premise fails at level " + std::to_string(k);
        break;
      }
      indices.push_back(e.index);
      prev = e.index;
    }
    if (!stall.empty()) {
      row.verdict = Verdict::kInapplicable;
      row.note = stall;
      out.report.rows.push_back(std::move(row));
      continue;
    }
    const long n_m = indices.back();
    std::string sched = "m=" + std::to_string(m) + ", schedule=[";
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (i > 0) sched += ",";
      sched += std::to_string(indices[i]);
    }
    sched += "]";
    if (n > n_m) {
      row.verdict = Verdict::kInapplicable;
      row.note = sched + "; start exceeds the schedule end";
      out.report.rows.push_back(std::move(row));
      continue;
    }
    Rational u = model.union_probability(n, n_m).value(b);
    row.lhs = Enclosure(u);
    row.rhs = Enclosure(rhs);
    row.margin = u - rhs;
    row.premise_ok = true;
    row.verdict = u >= rhs ? Verdict::kHolds : Verdict::kViolated;
    row.note = sched;
    out.schedules.back() = ErdosRenyiResult::Schedule{m, std::move(indices)};
    out.report.rows.push_back(std::move(row));
  }
  return out;
}

KochenStoneResult kochen_stone_quantitative(const SequenceModel& model,
                                            const RateFunction& phi, long m, long l,
                                            const std::function<long(long)>& g,
                                            const std::string& g_label, long n_budget) {
  if (m < 0) throw InvalidInput("start m must be >= 0");
  if (l < 0) throw InvalidInput("level must be >= 0");
  if (!g) throw InvalidInput("window function is required");
  if (n_budget <= m) throw InvalidInput("search budget must exceed the start m");
  if (phi.block_count() != model.block_count()) {
    throw InvalidInput("rate table block count does not match the model");
  }

  KochenStoneResult out;
  out.report.check_id = "kochen-stone";
  out.report.relation =
      "exists n > m with, for all j in [n, g(n)]: P(U_{k<=n} A_k|F) + 2^-l >= "
      "(sum_{k<=j} P(A_k|F))^2 / sum_{i,k<=j} P(A_i A_k|F)";
  out.report.add_param("m", std::to_string(m));
  out.report.add_param("l", std::to_string(l));
  out.report.add_param("g", g_label);
  out.report.add_param("budget", std::to_string(n_budget));
  const Rational tol = Rational::pow2(-l);

  for (std::size_t b = 0; b < model.block_count(); ++b) {
    out.witnesses.emplace_back();
    if (skip_null_block(model, b, out.report)) continue;
    BoundRow row = block_row(model, b);

    // Premise side: the divergence table must be fully applicable and its
    // entries re-verify exactly.
    const RateTable& table = phi.table(b);
    bool premise_held = table.status == RateStatus::kApplicable && !table.entries.empty();
    if (premise_held) {
      MarginalScanner sc(model, b);
      for (std::size_t i = 0; i < table.entries.size() && premise_held; ++i) {
        while (sc.index() < table.entries[i]) {
          if (!sc.has_next()) {
            premise_held = false;
            break;
          }
          sc.advance();
        }
        if (premise_held && sc.partial_sum() < Rational(table.level_min + static_cast<long>(i))) {
          premise_held = false;
        }
      }
    }
    row.premise_ok = premise_held;

    RunScanner run(model, b);
    CorrelationScanner cor(model, b);
    std::vector<Rational> ratios;  // ratios[j-1] = S_j^2 / D_j, 0 when D_j = 0
    std::deque<std::size_t> window;
    bool family_short = false;
    std::optional<long> found;
    long high_water = 0;
    Rational u, lhs_val;

    auto extend_ratios = [&](long j_target) -> bool {
      while (cor.index() < j_target) {
        if (!cor.has_next()) return false;
        cor.advance();
        const Rational& s = cor.marginal_sum();
        const Rational& d = cor.double_sum();
        Rational r = d.is_zero() ? Rational(0) : s * s / d;
        std::size_t j = static_cast<std::size_t>(cor.index());
        while (!window.empty() && ratios[window.back() - 1] <= r) window.pop_back();
        ratios.push_back(std::move(r));
        window.push_back(j);
      }
      return true;
    };

    long gn = 0;
    for (long cand = m + 1; cand <= n_budget; ++cand) {
      gn = g(cand);
      if (gn <= cand) {
        throw InvalidInput("window function must satisfy g(i) > i (violated at i = " +
                           std::to_string(cand) + ")");
      }
      bool reached = true;
      while (run.index() < cand) {
        if (!run.has_next()) {
          reached = false;
          break;
        }
        run.advance();
      }
      if (!reached || !extend_ratios(gn)) {
        family_short = true;
        break;
      }
      u = run.union_prefix();
      lhs_val = u + tol;
      bool pass;
      if (gn >= high_water) {
        high_water = gn;
        while (!window.empty() && window.front() < static_cast<std::size_t>(cand)) {
          window.pop_front();
        }
        pass = lhs_val >= ratios[window.front() - 1];
      } else {
        // A shrinking window invalidates the deque; scan the range directly.
        pass = true;
        for (long j = cand; j <= gn && pass; ++j) {
          pass = lhs_val >= ratios[static_cast<std::size_t>(j - 1)];
        }
      }
      if (pass) {
        found = cand;
        break;
      }
    }

    if (found) {
      KochenStoneResult::Witness w;
      w.n = *found;
      w.window_end = gn;
      w.margins.reserve(static_cast<std::size_t>(gn - *found + 1));
      for (long j = *found; j <= gn; ++j) {
        w.margins.push_back(lhs_val - ratios[static_cast<std::size_t>(j - 1)]);
      }
      w.min_margin = w.margins.front();
      for (const Rational& mg : w.margins) w.min_margin = min(w.min_margin, mg);
      row.verdict = Verdict::kHolds;
      row.lhs = Enclosure(lhs_val);
      row.rhs = Enclosure(lhs_val - w.min_margin);
      row.margin = w.min_margin;
      row.note = "witness n = " + std::to_string(w.n) + ", window [" + std::to_string(w.n) +
                 ", " + std::to_string(gn) + "], min margin = " + w.min_margin.str();
      out.witnesses.back() = std::move(w);
    } else if (family_short) {
      if (premise_held) {
        row.verdict = Verdict::kViolated;
        row.note = "no witness within the family (every complete window checked)";
      } else {
        row.verdict = Verdict::kInapplicable;
        row.note = "premise not established and the family ends without a witness";
      }
    } else {
      row.verdict = Verdict::kInconclusive;
      row.note = "search budget exhausted at n = " + std::to_string(n_budget) +
                 (premise_held ? "" : " (premise not established)");
    }
    out.report.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace bcq
