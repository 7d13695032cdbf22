// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <span>
#include <string>
#include <vector>

#include "dst/matrix.hpp"

namespace dst::objective {

/// Softmax over raw dot-product scores for one anchor.
struct ScoreDistribution {
    std::vector<double> probabilities;
    std::vector<double> log_probabilities;
    std::vector<double> raw_scores;
    std::vector<std::string> candidate_ids;  // optional; empty when anchors are positional

    std::size_t size() const { return probabilities.size(); }
};

/// Max-shifted softmax of raw scores. Throws EmptyCandidates.
ScoreDistribution softmax(std::vector<double> raw_scores);

/// Distribution of `anchor` over the rows of `candidates`.
/// Throws EmptyCandidates or DimensionMismatch.
ScoreDistribution score_distribution(std::span<const double> anchor, const Matrix& candidates,
                                     std::vector<std::string> candidate_ids = {});

/// -log p[label]. Throws LabelOutOfRange.
double cross_entropy(const ScoreDistribution& dist, std::size_t label);

/// KL(teacher || student) with 0 * log 0 := 0. Throws CandidateMismatch.
double kl_divergence(const ScoreDistribution& teacher, const ScoreDistribution& student);

struct TermSwitches {
    bool ce_p = true;
    bool ce_q = true;
    bool kl_p = true;
    bool kl_q = true;

    bool any() const { return ce_p || ce_q || kl_p || kl_q; }
    bool operator==(const TermSwitches&) const = default;
};

/// Which way the consistency KL points. The clean-query distribution is
/// always the detached side.
enum class KlDirection { TeacherToStudent, StudentToTeacher };

struct LossConfig {
    double beta = 0.5;
    double gamma = 0.5;
    double sigma = 0.2;
    std::size_t k_variants = 4;
    TermSwitches enabled;
    KlDirection kl_direction = KlDirection::TeacherToStudent;

    /// Throws InvalidConfig when a coefficient leaves [0, 1] or every term is disabled.
    void validate() const;

    /// Passage-retrieval cross-entropy on clean queries only.
    static LossConfig dpr();

    bool operator==(const LossConfig&) const = default;
};

/// Positive pairing for one batch.
///
/// y_p[n] is the candidate-passage index of query n's positive. Query
/// retrieval uses one anchor per query: the passage at anchor_passages[j]
/// ranks the N queries and its relevant query is y_q[j].
struct BatchLabels {
    std::vector<std::size_t> y_p;
    std::vector<std::size_t> anchor_passages;
    std::vector<std::size_t> y_q;

    /// One anchor per query, y_q the inverse of y_p.
    static BatchLabels from_positives(std::vector<std::size_t> y_p);
};

/// The four families of score distributions for one batch.
struct BatchDistributions {
    std::vector<ScoreDistribution> s_p;                 // per clean query, over passages
    std::vector<ScoreDistribution> s_q;                 // per anchor passage, over clean queries
    std::vector<std::vector<ScoreDistribution>> s_p_k;  // [k][query], misspelled over passages
    std::vector<std::vector<ScoreDistribution>> s_q_k;  // [k][anchor], anchor over misspelled set k
};

/// Computes every distribution from embeddings. `variants[k]` holds the k-th
/// misspelled set, one row per clean query.
BatchDistributions compute_distributions(const Matrix& queries, const std::vector<Matrix>& variants,
                                         const Matrix& passages, const BatchLabels& labels);

/// Unweighted per-term values, each a mean over its anchors (and over k for KL).
struct TermValues {
    double ce_p = 0.0;
    double ce_q = 0.0;
    double kl_p = 0.0;
    double kl_q = 0.0;
};

/// (1 - gamma) * CE_P + gamma * CE_Q over enabled terms; no renormalization.
double dual_cross_entropy(const std::vector<ScoreDistribution>& s_p, const std::vector<ScoreDistribution>& s_q,
                          const BatchLabels& labels, const LossConfig& config);

/// (1/K) sum_k [(1 - sigma) KL_P^k + sigma KL_Q^k] over enabled terms.
/// Throws KMismatch when the number of variant sets differs from config.k_variants.
double dual_kl(const std::vector<std::vector<ScoreDistribution>>& s_p_k,
               const std::vector<std::vector<ScoreDistribution>>& s_q_k,
               const std::vector<ScoreDistribution>& s_p, const std::vector<ScoreDistribution>& s_q,
               const LossConfig& config);

struct DstGradients {
    Matrix queries;
    std::vector<Matrix> variants;
    Matrix passages;
};

struct DstResult {
    double loss = 0.0;
    double dual_ce = 0.0;
    double dual_kl = 0.0;
    TermValues terms;
    DstGradients grads;
};

/// (1 - beta) L_DCE + beta L_DKL and its exact gradient with respect to
/// every query, variant and passage embedding. The clean distributions inside
/// the KL terms are treated as constants.
DstResult dst_loss(const Matrix& queries, const std::vector<Matrix>& variants, const Matrix& passages,
                   const BatchLabels& labels, const LossConfig& config);

}  // namespace dst::objective
