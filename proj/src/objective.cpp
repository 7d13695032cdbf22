// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/objective.hpp"

#include <algorithm>
#include <cmath>

#include "dst/error.hpp"

namespace dst::objective {

namespace {

void check_same_candidates(const ScoreDistribution& a, const ScoreDistribution& b) {
    if (a.size() != b.size() || a.candidate_ids != b.candidate_ids)
        fail(ErrorCode::CandidateMismatch, "distributions are over different candidate sets");
}

double mean_ce(const std::vector<ScoreDistribution>& dists, const std::vector<std::size_t>& labels) {
    if (dists.size() != labels.size())
        fail(ErrorCode::LabelOutOfRange, "label count does not match distribution count");
    if (dists.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < dists.size(); ++i) s += cross_entropy(dists[i], labels[i]);
    return s / static_cast<double>(dists.size());
}

double directed_kl(const ScoreDistribution& teacher, const ScoreDistribution& student, KlDirection dir) {
    return dir == KlDirection::TeacherToStudent ? kl_divergence(teacher, student)
                                                : kl_divergence(student, teacher);
}

double mean_kl(const std::vector<ScoreDistribution>& teachers, const std::vector<ScoreDistribution>& students,
               KlDirection dir) {
    if (teachers.size() != students.size())
        fail(ErrorCode::CandidateMismatch, "teacher and student anchor counts differ");
    if (teachers.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < teachers.size(); ++i) s += directed_kl(teachers[i], students[i], dir);
    return s / static_cast<double>(teachers.size());
}

// d/dz of the directed KL with respect to the student's raw scores.
void kl_logit_grad(const ScoreDistribution& teacher, const ScoreDistribution& student, KlDirection dir,
                   double weight, std::vector<double>& out) {
    const std::size_t n = student.size();
    out.resize(n);
    if (dir == KlDirection::TeacherToStudent) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = weight * (student.probabilities[i] - teacher.probabilities[i]);
        return;
    }
    const double kl = kl_divergence(student, teacher);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = student.probabilities[i];
        out[i] = s == 0.0 ? 0.0
                          : weight * s * (student.log_probabilities[i] - teacher.log_probabilities[i] - kl);
    }
}

// Scores are anchor . candidates[c]; distributes dL/dscore onto both sides.
void backprop_scores(std::span<const double> grad, std::span<const double> anchor, const Matrix& candidates,
                     std::span<double> d_anchor, Matrix& d_candidates) {
    const std::size_t d = anchor.size();
    for (std::size_t c = 0; c < grad.size(); ++c) {
        const double g = grad[c];
        if (g == 0.0) continue;
        auto cand = candidates.row(c);
        auto dcand = d_candidates.row(c);
        for (std::size_t j = 0; j < d; ++j) {
            d_anchor[j] += g * cand[j];
            dcand[j] += g * anchor[j];
        }
    }
}

}  // namespace

ScoreDistribution softmax(std::vector<double> raw_scores) {
    if (raw_scores.empty()) fail(ErrorCode::EmptyCandidates, "softmax over zero candidates");
    ScoreDistribution d;
    const double peak = *std::max_element(raw_scores.begin(), raw_scores.end());
    d.probabilities.resize(raw_scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < raw_scores.size(); ++i) {
        d.probabilities[i] = std::exp(raw_scores[i] - peak);
        sum += d.probabilities[i];
    }
    const double log_sum = std::log(sum);
    d.log_probabilities.resize(raw_scores.size());
    for (std::size_t i = 0; i < raw_scores.size(); ++i) {
        d.probabilities[i] /= sum;
        d.log_probabilities[i] = (raw_scores[i] - peak) - log_sum;
    }
    d.raw_scores = std::move(raw_scores);
    return d;
}

ScoreDistribution score_distribution(std::span<const double> anchor, const Matrix& candidates,
                                     std::vector<std::string> candidate_ids) {
    if (candidates.rows() == 0) fail(ErrorCode::EmptyCandidates, "no candidates to score");
    if (candidates.cols() != anchor.size())
        fail(ErrorCode::DimensionMismatch, "anchor dimension " + std::to_string(anchor.size()) +
                                               " vs candidate dimension " + std::to_string(candidates.cols()));
    if (!candidate_ids.empty() && candidate_ids.size() != candidates.rows())
        fail(ErrorCode::CandidateMismatch, "candidate id count does not match candidate rows");
    std::vector<double> raw(candidates.rows());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = dot(anchor, candidates.row(i));
    ScoreDistribution d = softmax(std::move(raw));
    d.candidate_ids = std::move(candidate_ids);
    return d;
}

double cross_entropy(const ScoreDistribution& dist, std::size_t label) {
    if (label >= dist.size())
        fail(ErrorCode::LabelOutOfRange,
             "label " + std::to_string(label) + " for " + std::to_string(dist.size()) + " candidates");
    return -dist.log_probabilities[label];
}

double kl_divergence(const ScoreDistribution& teacher, const ScoreDistribution& student) {
    check_same_candidates(teacher, student);
    double s = 0.0;
    for (std::size_t i = 0; i < teacher.size(); ++i) {
        const double t = teacher.probabilities[i];
        if (t > 0.0) s += t * (teacher.log_probabilities[i] - student.log_probabilities[i]);
    }
    // Gibbs' inequality; rounding can leave a tiny negative residue.
    return std::max(0.0, s);
}

void LossConfig::validate() const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(beta) || !in_unit(gamma) || !in_unit(sigma))
        fail(ErrorCode::InvalidConfig, "beta, gamma and sigma must lie in [0, 1]");
    if (!enabled.any()) fail(ErrorCode::InvalidConfig, "at least one loss term must be enabled");
}

LossConfig LossConfig::dpr() {
    LossConfig c;
    c.beta = 0.0;
    c.gamma = 0.0;
    c.k_variants = 0;
    return c;
}

BatchLabels BatchLabels::from_positives(std::vector<std::size_t> y_p) {
    BatchLabels labels;
    labels.anchor_passages = y_p;
    labels.y_q.resize(y_p.size());
    for (std::size_t n = 0; n < y_p.size(); ++n) labels.y_q[n] = n;
    labels.y_p = std::move(y_p);
    return labels;
}

BatchDistributions compute_distributions(const Matrix& queries, const std::vector<Matrix>& variants,
                                         const Matrix& passages, const BatchLabels& labels) {
    if (labels.y_p.size() != queries.rows())
        fail(ErrorCode::LabelOutOfRange, "y_p must hold one label per query");
    if (labels.anchor_passages.size() != labels.y_q.size())
        fail(ErrorCode::LabelOutOfRange, "anchor and y_q counts differ");
    for (std::size_t a : labels.anchor_passages)
        if (a >= passages.rows()) fail(ErrorCode::LabelOutOfRange, "anchor passage out of range");

    BatchDistributions out;
    out.s_p.reserve(queries.rows());
    for (std::size_t n = 0; n < queries.rows(); ++n) out.s_p.push_back(score_distribution(queries.row(n), passages));
    for (std::size_t a : labels.anchor_passages) out.s_q.push_back(score_distribution(passages.row(a), queries));
    for (const Matrix& v : variants) {
        if (v.rows() != queries.rows() || v.cols() != queries.cols())
            fail(ErrorCode::DimensionMismatch, "each misspelled set needs one row per query");
        auto& sp = out.s_p_k.emplace_back();
        for (std::size_t n = 0; n < v.rows(); ++n) sp.push_back(score_distribution(v.row(n), passages));
        auto& sq = out.s_q_k.emplace_back();
        for (std::size_t a : labels.anchor_passages) sq.push_back(score_distribution(passages.row(a), v));
    }
    return out;
}

double dual_cross_entropy(const std::vector<ScoreDistribution>& s_p, const std::vector<ScoreDistribution>& s_q,
                          const BatchLabels& labels, const LossConfig& config) {
    double loss = 0.0;
    if (config.enabled.ce_p) loss += (1.0 - config.gamma) * mean_ce(s_p, labels.y_p);
    if (config.enabled.ce_q) loss += config.gamma * mean_ce(s_q, labels.y_q);
    return loss;
}

double dual_kl(const std::vector<std::vector<ScoreDistribution>>& s_p_k,
               const std::vector<std::vector<ScoreDistribution>>& s_q_k,
               const std::vector<ScoreDistribution>& s_p, const std::vector<ScoreDistribution>& s_q,
               const LossConfig& config) {
    const std::size_t k = config.k_variants;
    if (s_p_k.size() != k || s_q_k.size() != k)
        fail(ErrorCode::KMismatch, "expected " + std::to_string(k) + " misspelled sets, got " +
                                       std::to_string(s_p_k.size()) + "/" + std::to_string(s_q_k.size()));
    if (k == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double term = 0.0;
        if (config.enabled.kl_p) term += (1.0 - config.sigma) * mean_kl(s_p, s_p_k[i], config.kl_direction);
        if (config.enabled.kl_q) term += config.sigma * mean_kl(s_q, s_q_k[i], config.kl_direction);
        sum += term;
    }
    return sum / static_cast<double>(k);
}

DstResult dst_loss(const Matrix& queries, const std::vector<Matrix>& variants, const Matrix& passages,
                   const BatchLabels& labels, const LossConfig& config) {
    config.validate();
    if (variants.size() != config.k_variants)
        fail(ErrorCode::KMismatch, "expected " + std::to_string(config.k_variants) + " misspelled sets, got " +
                                       std::to_string(variants.size()));
    if (queries.cols() != passages.cols())
        fail(ErrorCode::DimensionMismatch, "query and passage dimensions differ");
    const BatchDistributions dist = compute_distributions(queries, variants, passages, labels);
    const std::size_t n_queries = queries.rows();
    const std::size_t n_anchors = labels.anchor_passages.size();
    const std::size_t k = config.k_variants;

    DstResult r;
    r.dual_ce = dual_cross_entropy(dist.s_p, dist.s_q, labels, config);
    r.dual_kl = dual_kl(dist.s_p_k, dist.s_q_k, dist.s_p, dist.s_q, config);
    r.loss = (1.0 - config.beta) * r.dual_ce + config.beta * r.dual_kl;

    r.terms.ce_p = mean_ce(dist.s_p, labels.y_p);
    r.terms.ce_q = mean_ce(dist.s_q, labels.y_q);
    for (std::size_t i = 0; i < k; ++i) {
        r.terms.kl_p += mean_kl(dist.s_p, dist.s_p_k[i], config.kl_direction);
        r.terms.kl_q += mean_kl(dist.s_q, dist.s_q_k[i], config.kl_direction);
    }
    if (k > 0) {
        r.terms.kl_p /= static_cast<double>(k);
        r.terms.kl_q /= static_cast<double>(k);
    }

    const std::size_t d = queries.cols();
    r.grads.queries = Matrix(n_queries, d);
    r.grads.passages = Matrix(passages.rows(), d);
    r.grads.variants.assign(k, Matrix(n_queries, d));

    const double dce_weight = 1.0 - config.beta;
    const double w_ce_p = config.enabled.ce_p && n_queries ? dce_weight * (1.0 - config.gamma) / n_queries : 0.0;
    const double w_ce_q = config.enabled.ce_q && n_anchors ? dce_weight * config.gamma / n_anchors : 0.0;
    const double dkl_weight = k ? config.beta / static_cast<double>(k) : 0.0;
    const double w_kl_p = config.enabled.kl_p && n_queries ? dkl_weight * (1.0 - config.sigma) / n_queries : 0.0;
    const double w_kl_q = config.enabled.kl_q && n_anchors ? dkl_weight * config.sigma / n_anchors : 0.0;

    std::vector<double> g;
    if (w_ce_p != 0.0) {
        for (std::size_t n = 0; n < n_queries; ++n) {
            const auto& s = dist.s_p[n];
            g.assign(s.probabilities.begin(), s.probabilities.end());
            g[labels.y_p[n]] -= 1.0;
            for (double& x : g) x *= w_ce_p;
            backprop_scores(g, queries.row(n), passages, r.grads.queries.row(n), r.grads.passages);
        }
    }
    if (w_ce_q != 0.0) {
        for (std::size_t j = 0; j < n_anchors; ++j) {
            const auto& s = dist.s_q[j];
            g.assign(s.probabilities.begin(), s.probabilities.end());
            g[labels.y_q[j]] -= 1.0;
            for (double& x : g) x *= w_ce_q;
            const std::size_t a = labels.anchor_passages[j];
            backprop_scores(g, passages.row(a), queries, r.grads.passages.row(a), r.grads.queries);
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (w_kl_p != 0.0) {
            for (std::size_t n = 0; n < n_queries; ++n) {
                kl_logit_grad(dist.s_p[n], dist.s_p_k[i][n], config.kl_direction, w_kl_p, g);
                backprop_scores(g, variants[i].row(n), passages, r.grads.variants[i].row(n), r.grads.passages);
            }
        }
        if (w_kl_q != 0.0) {
            for (std::size_t j = 0; j < n_anchors; ++j) {
                kl_logit_grad(dist.s_q[j], dist.s_q_k[i][j], config.kl_direction, w_kl_q, g);
                const std::size_t a = labels.anchor_passages[j];
                backprop_scores(g, passages.row(a), variants[i], r.grads.passages.row(a), r.grads.variants[i]);
            }
        }
    }
    return r;
}

}  // namespace dst::objective
