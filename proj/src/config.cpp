// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dst/error.hpp"

namespace dst {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    fail(ErrorCode::InvalidConfig, "key '" + key + "': '" + value + "' is not " + expected);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v[0] == '-' || v[0] == '+') bad_value(key, v, "a non-negative integer");
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (errno != 0 || end != v.c_str() + v.size()) bad_value(key, v, "a non-negative integer");
    return x;
}

double to_double(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || errno != 0 || end != v.c_str() + v.size()) bad_value(key, v, "a number");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, v, "a boolean (true/false)");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* fmt(bool v) { return v ? "true" : "false"; }

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& source) {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::InvalidConfig, source + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) fail(ErrorCode::InvalidConfig, source + ":" + std::to_string(line_no) + ": empty key");
        if (!out.emplace(key, value).second)
            fail(ErrorCode::InvalidConfig, source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return out;
}

bool apply_train_key(train::TrainConfig& c, const std::string& key, const std::string& v) {
    if (key == "batch_size") c.batch_size = to_u64(key, v);
    else if (key == "hard_negatives") c.hard_negatives = to_u64(key, v);
    else if (key == "total_steps") c.total_steps = to_u64(key, v);
    else if (key == "warmup_steps") c.warmup_steps = to_u64(key, v);
    else if (key == "learning_rate") c.learning_rate = to_double(key, v);
    else if (key == "weight_decay") c.adam.weight_decay = to_double(key, v);
    else if (key == "init_scale") c.init_scale = to_double(key, v);
    else if (key == "adam_beta1") c.adam.beta1 = to_double(key, v);
    else if (key == "adam_beta2") c.adam.beta2 = to_double(key, v);
    else if (key == "adam_epsilon") c.adam.epsilon = to_double(key, v);
    else if (key == "seed") c.seed = to_u64(key, v);
    else if (key == "beta") c.loss.beta = to_double(key, v);
    else if (key == "gamma") c.loss.gamma = to_double(key, v);
    else if (key == "sigma") c.loss.sigma = to_double(key, v);
    else if (key == "k_variants") c.loss.k_variants = to_u64(key, v);
    else if (key == "ce_p") c.loss.enabled.ce_p = to_bool(key, v);
    else if (key == "ce_q") c.loss.enabled.ce_q = to_bool(key, v);
    else if (key == "kl_p") c.loss.enabled.kl_p = to_bool(key, v);
    else if (key == "kl_q") c.loss.enabled.kl_q = to_bool(key, v);
    else if (key == "kl_direction") {
        if (v == "teacher_to_student") c.loss.kl_direction = objective::KlDirection::TeacherToStudent;
        else if (v == "student_to_teacher") c.loss.kl_direction = objective::KlDirection::StudentToTeacher;
        else bad_value(key, v, "teacher_to_student or student_to_teacher");
    } else if (key == "hash_buckets") c.encoder.hash_buckets = to_u64(key, v);
    else if (key == "embed_dim") c.encoder.embed_dim = to_u64(key, v);
    else if (key == "ngram_min") c.encoder.ngram_min = to_u64(key, v);
    else if (key == "ngram_max") c.encoder.ngram_max = to_u64(key, v);
    else if (key == "tie_weights") c.encoder.tie_weights = to_bool(key, v);
    else if (key == "checkpoint_interval") c.checkpoint_interval = to_u64(key, v);
    else if (key == "freeze_augmentation") c.freeze_augmentation = to_bool(key, v);
    else if (key == "threads") c.threads = to_u64(key, v);
    else return false;
    return true;
}

train::TrainConfig parse_train_config(std::string_view text, const std::string& source) {
    train::TrainConfig c;
    for (const auto& [key, value] : parse_key_values(text, source))
        if (!apply_train_key(c, key, value)) fail(ErrorCode::InvalidConfig, source + ": unknown key '" + key + "'");
    c.validate();
    return c;
}

train::TrainConfig load_train_config(const std::filesystem::path& path) {
    return parse_train_config(read_text(path), path.string());
}

std::string to_config_text(const train::TrainConfig& c) {
    std::ostringstream o;
    o << "batch_size = " << c.batch_size << '\n'
      << "hard_negatives = " << c.hard_negatives << '\n'
      << "total_steps = " << c.total_steps << '\n'
      << "warmup_steps = " << c.warmup_steps << '\n'
      << "learning_rate = " << fmt(c.learning_rate) << '\n'
      << "weight_decay = " << fmt(c.adam.weight_decay) << '\n'
      << "init_scale = " << fmt(c.init_scale) << '\n'
      << "adam_beta1 = " << fmt(c.adam.beta1) << '\n'
      << "adam_beta2 = " << fmt(c.adam.beta2) << '\n'
      << "adam_epsilon = " << fmt(c.adam.epsilon) << '\n'
      << "seed = " << c.seed << '\n'
      << "beta = " << fmt(c.loss.beta) << '\n'
      << "gamma = " << fmt(c.loss.gamma) << '\n'
      << "sigma = " << fmt(c.loss.sigma) << '\n'
      << "k_variants = " << c.loss.k_variants << '\n'
      << "ce_p = " << fmt(c.loss.enabled.ce_p) << '\n'
      << "ce_q = " << fmt(c.loss.enabled.ce_q) << '\n'
      << "kl_p = " << fmt(c.loss.enabled.kl_p) << '\n'
      << "kl_q = " << fmt(c.loss.enabled.kl_q) << '\n'
      << "kl_direction = "
      << (c.loss.kl_direction == objective::KlDirection::TeacherToStudent ? "teacher_to_student" : "student_to_teacher")
      << '\n'
      << "hash_buckets = " << c.encoder.hash_buckets << '\n'
      << "embed_dim = " << c.encoder.embed_dim << '\n'
      << "ngram_min = " << c.encoder.ngram_min << '\n'
      << "ngram_max = " << c.encoder.ngram_max << '\n'
      << "tie_weights = " << fmt(c.encoder.tie_weights) << '\n'
      << "checkpoint_interval = " << c.checkpoint_interval << '\n'
      << "freeze_augmentation = " << fmt(c.freeze_augmentation) << '\n'
      << "threads = " << c.threads << '\n';
    return o.str();
}

void ExperimentConfig::validate() const {
    train.validate();
    if (eval_variants == 0) fail(ErrorCode::InvalidConfig, "eval_variants must be >= 1");
    if (retrieve_k == 0) fail(ErrorCode::InvalidConfig, "retrieve_k must be >= 1");
    if (neighbors == 0) fail(ErrorCode::InvalidConfig, "neighbors must be >= 1");
    if (metrics.empty()) fail(ErrorCode::InvalidConfig, "metrics must not be empty");
    if (out_dir.empty()) fail(ErrorCode::InvalidConfig, "out_dir is required");
    if (corpus_dir.empty()) fail(ErrorCode::InvalidConfig, "corpus_dir is required");
    if (!std::filesystem::is_directory(corpus_dir))
        fail(ErrorCode::IoError, "corpus directory does not exist: " + corpus_dir.string());
    if (baseline_dir && !std::filesystem::is_directory(*baseline_dir))
        fail(ErrorCode::IoError, "baseline directory does not exist: " + baseline_dir->string());
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir,
                                         const std::string& source) {
    ExperimentConfig c;
    for (const auto& [key, value] : parse_key_values(text, source)) {
        if (apply_train_key(c.train, key, value)) continue;
        if (key == "corpus_dir") c.corpus_dir = resolve(base_dir, value);
        else if (key == "out_dir") c.out_dir = resolve(base_dir, value);
        else if (key == "metrics") {
            try {
                c.metrics = eval::parse_metric_list(value);
            } catch (const Error& e) {
                fail(ErrorCode::InvalidConfig, source + ": " + e.what());
            }
        } else if (key == "eval_variants") c.eval_variants = to_u64(key, value);
        else if (key == "eval_seed") c.eval_seed = to_u64(key, value);
        else if (key == "retrieve_k") c.retrieve_k = to_u64(key, value);
        else if (key == "neighbors") c.neighbors = to_u64(key, value);
        else if (key == "baseline_dir") {
            if (value.empty()) c.baseline_dir.reset();
            else c.baseline_dir = resolve(base_dir, value);
        } else if (key == "comparisons") c.comparisons = to_u64(key, value);
        else fail(ErrorCode::InvalidConfig, source + ": unknown key '" + key + "'");
    }
    c.train.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_text(path), path.parent_path(), path.string());
}

std::string to_config_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o << to_config_text(c.train);
    o << "corpus_dir = " << c.corpus_dir.string() << '\n';
    o << "out_dir = " << c.out_dir.string() << '\n';
    o << "metrics = ";
    for (std::size_t i = 0; i < c.metrics.size(); ++i) o << (i ? "," : "") << c.metrics[i].name();
    o << '\n';
    o << "eval_variants = " << c.eval_variants << '\n';
    if (c.eval_seed) o << "eval_seed = " << *c.eval_seed << '\n';
    o << "retrieve_k = " << c.retrieve_k << '\n';
    o << "neighbors = " << c.neighbors << '\n';
    if (c.baseline_dir) o << "baseline_dir = " << c.baseline_dir->string() << '\n';
    o << "comparisons = " << c.comparisons << '\n';
    return o.str();
}

}  // namespace dst
