// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Python bindings. Matrices cross the boundary as float64 numpy arrays
// (copied both ways); library errors surface as dst_retrieval.DstError with
// the error code name in `code`.

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dst/checkpoint.hpp"
#include "dst/config.hpp"
#include "dst/corpus.hpp"
#include "dst/dense_index.hpp"
#include "dst/density.hpp"
#include "dst/encoder.hpp"
#include "dst/error.hpp"
#include "dst/experiment.hpp"
#include "dst/metrics.hpp"
#include "dst/objective.hpp"
#include "dst/random.hpp"
#include "dst/stats.hpp"
#include "dst/typo.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

dst::Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
    dst::Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    if (!m.values().empty()) std::memcpy(m.values().data(), a.data(), m.values().size() * sizeof(double));
    return m;
}

Array to_array(const dst::Matrix& m) {
    Array a({m.rows(), m.cols()});
    if (!m.values().empty()) std::memcpy(a.mutable_data(), m.values().data(), m.values().size() * sizeof(double));
    return a;
}

dst::typo::TypoKind kind_from(const std::string& name) {
    const auto k = dst::typo::parse_kind(name);
    if (!k) throw py::value_error("unknown typo kind '" + name + "'");
    return *k;
}

std::vector<dst::TextRecord> records_from(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::vector<dst::TextRecord> out;
    out.reserve(rows.size());
    for (const auto& [id, text] : rows) out.push_back({id, text});
    return out;
}

dst::RankedRun run_from(const std::map<std::string, std::vector<std::pair<std::string, double>>>& rankings) {
    dst::RankedRun run;
    for (const auto& [qid, list] : rankings)
        for (const auto& [pid, score] : list) run.rankings[qid].push_back({pid, score});
    for (auto& [qid, list] : run.rankings) std::sort(list.begin(), list.end(), dst::ranks_before);
    return run;
}

py::dict report_means(const dst::eval::MetricReport& report) {
    py::dict out;
    for (const auto& m : report.metrics) out[py::str(m.name)] = m.mean;
    return out;
}

// Checkpoint plus the operations that only make sense with a trained model.
class Model {
 public:
    explicit Model(dst::Checkpoint ckpt) : ckpt_(std::move(ckpt)) {}

    static Model load(const fs::path& path) { return Model(dst::load_checkpoint(path)); }
    static Model initialize(std::size_t hash_buckets, std::size_t embed_dim, bool tie_weights, std::uint64_t seed) {
        dst::encoder::EncoderConfig c;
        c.hash_buckets = hash_buckets;
        c.embed_dim = embed_dim;
        c.tie_weights = tie_weights;
        return Model(dst::Checkpoint{dst::encoder::DualEncoder::initialize(c, seed), seed, std::nullopt});
    }

    void save(const fs::path& path) const { dst::save_checkpoint(path, ckpt_); }
    std::size_t embed_dim() const { return ckpt_.model.config.embed_dim; }
    std::size_t hash_buckets() const { return ckpt_.model.config.hash_buckets; }
    bool tie_weights() const { return ckpt_.model.config.tie_weights; }
    std::string fingerprint() const { return dst::model_fingerprint(ckpt_.model, ckpt_.seed); }

    Array encode_queries(const std::vector<std::string>& texts, std::size_t threads) const {
        return to_array(dst::encoder::encode_texts(texts, ckpt_.model.query_params(), ckpt_.model.config, threads));
    }
    Array encode_passages(const std::vector<std::string>& texts, std::size_t threads) const {
        return to_array(dst::encoder::encode_texts(texts, ckpt_.model.passage_params(), ckpt_.model.config, threads));
    }

    const dst::Checkpoint& checkpoint() const { return ckpt_; }

 private:
    dst::Checkpoint ckpt_;
};

class Index {
 public:
    explicit Index(dst::index::PassageIndex idx) : idx_(std::move(idx)) {}

    static Index build(const std::vector<std::pair<std::string, std::string>>& passages, const Model& model,
                       std::size_t threads) {
        return Index(dst::index::build_index(records_from(passages), model.checkpoint(), threads));
    }
    static Index from_array(const Array& rows, std::vector<std::string> ids) {
        return Index(dst::index::index_from_matrix(to_matrix(rows), std::move(ids)));
    }
    static Index load(const fs::path& path) { return Index(dst::index::load_index(path)); }

    void save(const fs::path& path) const { dst::index::save_index(path, idx_); }
    std::size_t size() const { return idx_.size(); }
    const std::vector<std::string>& ids() const { return idx_.ids; }
    Array matrix() const { return to_array(idx_.matrix); }

    std::vector<std::vector<std::pair<std::string, double>>> search(const Array& queries, std::size_t k,
                                                                    std::size_t threads) const {
        const dst::Matrix q = to_matrix(queries);
        dst::index::SearchOptions opt;
        opt.k = k;
        opt.threads = threads;
        std::vector<std::vector<std::pair<std::string, double>>> out;
        for (std::size_t r = 0; r < q.rows(); ++r) {
            auto& hits = out.emplace_back();
            for (const auto& h : dst::index::search_one(idx_, q.row(r), opt)) hits.emplace_back(h.passage_id, h.score);
        }
        return out;
    }

 private:
    dst::index::PassageIndex idx_;
};

}  // namespace

PYBIND11_MODULE(_dst_retrieval, m) {
    m.doc() = "Typo-robust dense retrieval with dual self-teaching";

    static py::exception<dst::Error> error_type(m, "DstError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const dst::Error& e) {
            py::object err = py::handle(error_type)(e.what());
            err.attr("code") = std::string(dst::to_string(e.code()));
            py::set_error(error_type, err);
        }
    });

    // Typo augmentation.
    m.def("typo_kinds", [] {
        std::vector<std::string> names;
        for (auto k : dst::typo::kAllKinds) names.emplace_back(dst::typo::to_string(k));
        return names;
    });
    m.def(
        "apply_typo",
        [](const std::string& word, const std::string& kind, std::uint64_t seed) {
            dst::Rng rng(seed);
            return dst::typo::apply_typo(word, kind_from(kind), rng);
        },
        py::arg("word"), py::arg("kind"), py::arg("seed"), "One seeded edit of the given kind applied to a word.");
    m.def(
        "augment_queries",
        [](const std::vector<std::pair<std::string, std::string>>& queries, std::size_t k, std::uint64_t seed) {
            const auto aug = dst::typo::augment_corpus(records_from(queries), k, seed);
            std::vector<std::tuple<std::string, std::string, std::string>> rows;
            for (const auto& r : dst::typo::variant_rows(aug)) rows.emplace_back(r.variant_id, r.query_id, r.text);
            return rows;
        },
        py::arg("queries"), py::arg("k"), py::arg("seed"),
        "Misspelled variants as (variant_id, query_id, text) rows for (id, text) queries.");

    // Encoder, checkpoints and index.
    py::class_<Model>(m, "Model")
        .def_static("load", &Model::load, py::arg("path"))
        .def_static("initialize", &Model::initialize, py::arg("hash_buckets") = std::size_t{1} << 15,
                    py::arg("embed_dim") = 128, py::arg("tie_weights") = false, py::arg("seed") = 0)
        .def("save", &Model::save, py::arg("path"))
        .def_property_readonly("embed_dim", &Model::embed_dim)
        .def_property_readonly("hash_buckets", &Model::hash_buckets)
        .def_property_readonly("tie_weights", &Model::tie_weights)
        .def_property_readonly("fingerprint", &Model::fingerprint)
        .def("encode_queries", &Model::encode_queries, py::arg("texts"), py::arg("threads") = 1)
        .def("encode_passages", &Model::encode_passages, py::arg("texts"), py::arg("threads") = 1);

    py::class_<Index>(m, "Index")
        .def_static("build", &Index::build, py::arg("passages"), py::arg("model"), py::arg("threads") = 1)
        .def_static("from_array", &Index::from_array, py::arg("rows"), py::arg("ids"))
        .def_static("load", &Index::load, py::arg("path"))
        .def("save", &Index::save, py::arg("path"))
        .def("__len__", &Index::size)
        .def_property_readonly("ids", &Index::ids)
        .def_property_readonly("matrix", &Index::matrix)
        .def("search", &Index::search, py::arg("queries"), py::arg("k") = 10, py::arg("threads") = 1,
             "Exact inner-product top-k per query row, ties broken by ascending passage id.");

    // Objective.
    m.def(
        "dst_loss",
        [](const Array& queries, const std::vector<Array>& variants, const Array& passages,
           std::vector<std::size_t> positives, double beta, double gamma, double sigma) {
            dst::objective::LossConfig c;
            c.beta = beta;
            c.gamma = gamma;
            c.sigma = sigma;
            c.k_variants = variants.size();
            std::vector<dst::Matrix> vs;
            for (const auto& v : variants) vs.push_back(to_matrix(v));
            const auto r = dst::objective::dst_loss(to_matrix(queries), vs, to_matrix(passages),
                                                    dst::objective::BatchLabels::from_positives(std::move(positives)), c);
            py::list vgrads;
            for (const auto& g : r.grads.variants) vgrads.append(to_array(g));
            py::dict out;
            out["loss"] = r.loss;
            out["dual_ce"] = r.dual_ce;
            out["dual_kl"] = r.dual_kl;
            out["grad_queries"] = to_array(r.grads.queries);
            out["grad_variants"] = vgrads;
            out["grad_passages"] = to_array(r.grads.passages);
            return out;
        },
        py::arg("queries"), py::arg("variants"), py::arg("passages"), py::arg("positives"), py::arg("beta") = 0.5,
        py::arg("gamma") = 0.5, py::arg("sigma") = 0.2,
        "Loss value and embedding gradients for one batch; clean-side distributions act as detached teachers.");

    // Evaluation.
    m.def(
        "evaluate",
        [](const std::map<std::string, std::vector<std::pair<std::string, double>>>& run,
           const std::map<std::string, std::map<std::string, int>>& qrels, const std::string& metrics) {
            dst::Qrels q;
            q.judgments = qrels;
            return report_means(dst::eval::evaluate_run(run_from(run), q, dst::eval::parse_metric_list(metrics)));
        },
        py::arg("run"), py::arg("qrels"), py::arg("metrics") = "mrr@10,recall@1000,ndcg@10,map",
        "Mean metric values; run maps query id to (passage id, score) pairs.");
    m.def(
        "paired_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b, std::size_t comparisons) {
            const auto r = dst::eval::paired_t_test(a, b, comparisons);
            py::dict out;
            out["t"] = r.t;
            out["p"] = r.p;
            out["corrected_p"] = r.corrected_p;
            out["mean_diff"] = r.mean_diff;
            out["n"] = r.n;
            out["degenerate"] = r.degenerate;
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("comparisons") = 1);
    m.def(
        "cosine_density",
        [](const std::vector<double>& sample, std::size_t points) {
            const auto c = dst::eval::similarity_density(sample, points);
            return py::make_tuple(c.grid, c.density, c.bandwidth);
        },
        py::arg("sample"), py::arg("points") = dst::eval::kDensityGridPoints,
        "(grid, density, bandwidth) of a Gaussian KDE over [-1, 1].");
    m.def(
        "distribution_overlap",
        [](const std::vector<double>& a, const std::vector<double>& b, std::size_t points) {
            return dst::eval::distribution_overlap(dst::eval::similarity_density(a, points),
                                                   dst::eval::similarity_density(b, points));
        },
        py::arg("a"), py::arg("b"), py::arg("points") = dst::eval::kDensityGridPoints);

    // Corpus and pipeline.
    m.def(
        "generate_corpus",
        [](const fs::path& out_dir, std::size_t passages, std::size_t train_queries, std::size_t eval_queries,
           std::uint64_t seed) {
            dst::corpus::SyntheticParams p;
            p.passages = passages;
            p.train_queries = train_queries;
            p.eval_queries = eval_queries;
            p.seed = seed;
            dst::corpus::write_corpus(out_dir, dst::corpus::generate_synthetic_corpus(p));
        },
        py::arg("out_dir"), py::arg("passages") = 2000, py::arg("train_queries") = 500,
        py::arg("eval_queries") = 200, py::arg("seed") = 7);
    m.def(
        "run_experiment",
        [](const fs::path& config, std::optional<fs::path> out_dir) {
            auto c = dst::load_experiment_config(config);
            if (out_dir) c.out_dir = *out_dir;
            dst::experiment::ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = dst::experiment::run_experiment(c);
            }
            py::dict out;
            out["report_dir"] = r.layout.root;
            out["clean"] = report_means(r.clean);
            out["misspelled"] = report_means(r.misspelled);
            out["overlap"] = r.distribution.overlap;
            return out;
        },
        py::arg("config"), py::arg("out_dir") = py::none(),
        "Runs (or resumes) an experiment config and returns mean metrics.");
}
