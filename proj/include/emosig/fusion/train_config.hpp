#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "emosig/textprep.hpp"
#include "emosig/fusion/model.hpp"
#include "emosig/fusion/train.hpp"

namespace emosig::fusion {

// A training run described by a TOML file. Relative paths resolve against the
// file's directory.
struct RunConfig {
    std::optional<ModelKind> model;
    std::filesystem::path corpus;
    std::filesystem::path lexicon;
    std::optional<std::filesystem::path> emoticons;
    std::optional<std::filesystem::path> slang;
    HashtagMode hashtag_mode = HashtagMode::strip_and_split;
    bool content_tokens_only = false;
    TrainConfig train;

    TextPipeline pipeline() const;
};

// Unknown keys and wrongly typed values are ConfigErrors.
RunConfig parse_run_config(std::string_view toml_text, const std::string& source,
                           const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace emosig::fusion
