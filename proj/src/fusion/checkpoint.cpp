#include "emosig/fusion/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include <fmt/format.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

namespace emosig::fusion {

namespace {

constexpr char kMagic[8] = {'E', 'M', 'O', 'S', 'I', 'G', 'C', 'K'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
public:
    Reader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

    std::uint64_t u64() { return uint(8); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    std::uint64_t uint(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    void need(std::size_t n) {
        if (data_.size() - pos_ < n) throw ValidationError(fmt::format("{}: truncated checkpoint", source_));
    }

    std::string_view data_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensors(const FusionModel& model) {
    std::string out(kMagic, sizeof kMagic);
    put_u32(out, kCheckpointVersion);
    const auto params = model.parameters();
    put_u64(out, params.size());
    for (const Parameter* p : params) {
        put_u64(out, p->name.size());
        out += p->name;
        put_u64(out, static_cast<std::uint64_t>(p->value.rows()));
        put_u64(out, static_cast<std::uint64_t>(p->value.cols()));
        for (Eigen::Index i = 0; i < p->value.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(p->value.data()[i]));
    }
    return out;
}

nlohmann::json checkpoint_sidecar(const FusionModel& model) {
    const auto& c = model.config;
    nlohmann::json tensors = nlohmann::json::array();
    for (const Parameter* p : model.parameters())
        tensors.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
    return {{"format_version", kCheckpointVersion},
            {"model", std::string(to_string(model.kind))},
            {"seed", c.seed},
            {"encoder",
             {{"embed_dim", c.embed_dim},
              {"layers", c.layers},
              {"heads", c.heads},
              {"max_seq", c.max_seq},
              {"ffn_dim", c.ffn_dim}}},
            {"head_dropout", model.head.dropout_rate},
            {"labels", model.labels},
            {"gi_categories", model.gi_categories},
            {"s_axes", model.s_axes},
            {"vocab", model.vocab.words()},
            {"tensors", tensors}};
}

void save_checkpoint(const FusionModel& model, const std::filesystem::path& path) {
    write_text_file(path, encode_tensors(model));
    write_text_file(path.string() + ".json", dump_canonical(checkpoint_sidecar(model)));
}

FusionModel load_checkpoint(const std::filesystem::path& path) {
    const std::string side_path = path.string() + ".json";
    const auto side = parse_json_strict(read_text_file(side_path), side_path);
    FusionModel m;
    try {
        if (side.at("format_version").get<std::uint32_t>() != kCheckpointVersion)
            throw ValidationError(fmt::format("{}: unsupported checkpoint version", side_path));
        ToyEncoderConfig c;
        const auto& e = side.at("encoder");
        c.embed_dim = e.at("embed_dim").get<std::size_t>();
        c.layers = e.at("layers").get<std::size_t>();
        c.heads = e.at("heads").get<std::size_t>();
        c.max_seq = e.at("max_seq").get<std::size_t>();
        c.ffn_dim = e.at("ffn_dim").get<std::size_t>();
        c.seed = side.at("seed").get<std::uint64_t>();
        m = init_model(parse_model_kind(side.at("model").get<std::string>()), c,
                       Vocabulary::from_words(side.at("vocab").get<std::vector<std::string>>()),
                       side.at("labels").get<std::vector<std::string>>(),
                       side.at("gi_categories").get<std::vector<std::string>>(),
                       side.at("s_axes").get<std::vector<std::string>>(), side.at("head_dropout").get<double>());
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(fmt::format("{}: malformed sidecar ({})", side_path, ex.what()));
    }

    const std::string data = read_text_file(path);
    Reader r(data, path.string());
    if (r.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic))
        throw ValidationError(fmt::format("{}: not a checkpoint file", path.string()));
    if (r.u32() != kCheckpointVersion)
        throw ValidationError(fmt::format("{}: unsupported checkpoint version", path.string()));
    std::map<std::string, Parameter*> by_name;
    for (Parameter* p : m.parameters()) by_name[p->name] = p;
    const std::uint64_t count = r.u64();
    if (count != by_name.size())
        throw ValidationError(
            fmt::format("{}: {} tensors, sidecar model has {}", path.string(), count, by_name.size()));
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::string name = r.bytes(r.u64());
        auto it = by_name.find(name);
        if (it == by_name.end()) throw ValidationError(fmt::format("{}: unexpected tensor '{}'", path.string(), name));
        Parameter& p = *it->second;
        const auto rows = r.u64();
        const auto cols = r.u64();
        if (rows != static_cast<std::uint64_t>(p.value.rows()) || cols != static_cast<std::uint64_t>(p.value.cols()))
            throw ValidationError(fmt::format("{}: tensor '{}' has shape {}x{}, expected {}x{}", path.string(), name,
                                              rows, cols, p.value.rows(), p.value.cols()));
        for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = std::bit_cast<double>(r.u64());
    }
    if (!r.done()) throw ValidationError(fmt::format("{}: trailing bytes", path.string()));
    return m;
}

}  // namespace emosig::fusion
