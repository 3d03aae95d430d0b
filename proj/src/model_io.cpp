#include "itk/model_io.h"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "itk/errors.h"
#include "itk/serialize.h"

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");
static_assert(sizeof(double) == 8);

namespace itk {

namespace {

using nlohmann::json;

constexpr size_t kMagicLen = sizeof(kModelMagic) - 1;  // without the NUL

uint64_t payload_checksum(const std::vector<double>& payload) {
    return fnv1a64({reinterpret_cast<const char*>(payload.data()),
                    payload.size() * sizeof(double)});
}

struct Section {
    std::string name;
    size_t offset;
    size_t count;
};

json sections_json(const std::vector<Section>& sections) {
    json out = json::array();
    for (const auto& s : sections) {
        out.push_back({{"name", s.name}, {"offset", s.offset}, {"count", s.count}});
    }
    return out;
}

// Appends values to the payload and records where they went.
class PayloadWriter {
  public:
    void add(std::string name, const double* values, size_t count) {
        sections_.push_back({std::move(name), payload_.size(), count});
        payload_.insert(payload_.end(), values, values + count);
    }
    const std::vector<double>& payload() const { return payload_; }
    const std::vector<Section>& sections() const { return sections_; }

  private:
    std::vector<double> payload_;
    std::vector<Section> sections_;
};

class PayloadReader {
  public:
    PayloadReader(const json& sections, std::vector<double> payload)
        : payload_(std::move(payload)) {
        for (const auto& s : sections) {
            sections_.push_back({s.at("name").get<std::string>(), s.at("offset").get<size_t>(),
                                 s.at("count").get<size_t>()});
        }
    }

    std::vector<double> take(const std::string& name) const {
        for (const auto& s : sections_) {
            if (s.name != name) continue;
            if (s.offset + s.count > payload_.size()) {
                throw model_format_error("section '" + name + "' exceeds payload");
            }
            return {payload_.begin() + static_cast<ptrdiff_t>(s.offset),
                    payload_.begin() + static_cast<ptrdiff_t>(s.offset + s.count)};
        }
        throw model_format_error("missing payload section '" + name + "'");
    }

  private:
    std::vector<double> payload_;
    std::vector<Section> sections_;
};

json header_for(const ModelBundle& b, PayloadWriter& w) {
    json h;
    h["format_version"] = kModelFormatVersion;
    h["model_kind"] = b.model_kind;
    h["seed"] = b.seed;
    h["normalization"] = norm_config_json(b.normalization);

    if (b.model_kind == "logreg") {
        if (!b.logreg || !b.vocabulary) throw data_error("logreg bundle is incomplete");
        const auto& m = *b.logreg;
        h["logreg"] = {{"n_features", m.n_features}};
        h["vocabulary"] = vocab_json(*b.vocabulary);
        w.add("weights", m.weights.data(), m.weights.size());
        w.add("bias", m.bias.data(), m.bias.size());
    } else if (b.model_kind == "fasttext") {
        if (!b.fasttext) throw data_error("fasttext bundle is incomplete");
        const auto& m = *b.fasttext;
        h["fasttext"] = {{"dim", m.dim},
                         {"extractor", extractor_json(m.extractor)},
                         {"skipped_empty", m.skipped_empty}};
        w.add("embeddings", m.embeddings.data(), m.embeddings.size());
        w.add("output", m.output.data(), m.output.size());
        w.add("bias", m.bias.data(), m.bias.size());
        w.add("priors", m.priors.data(), m.priors.size());
    } else if (b.model_kind == "transformer") {
        if (!b.transformer) throw data_error("transformer bundle is incomplete");
        const auto& m = *b.transformer;
        json tensors = json::array();
        for (const auto& e : m.params.entries) {
            tensors.push_back({{"name", e.name}, {"offset", e.offset}, {"count", e.count}});
        }
        h["transformer"] = {{"config", transformer_config_json(m.cfg)},
                            {"tokens", m.vocab.id_to_token},
                            {"tensors", tensors}};
        w.add("params", m.params.data.data(), m.params.data.size());
    } else {
        throw data_error("unknown model kind: " + b.model_kind);
    }
    h["sections"] = sections_json(w.sections());
    h["payload_checksum"] = payload_checksum(w.payload());
    return h;
}

}  // namespace

void save_model(const ModelBundle& b, const std::string& path) {
    PayloadWriter w;
    const json header = header_for(b, w);
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write(kModelMagic, static_cast<std::streamsize>(kMagicLen));
    const uint32_t header_len = static_cast<uint32_t>(header_text.size());
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    out.write(reinterpret_cast<const char*>(w.payload().data()),
              static_cast<std::streamsize>(w.payload().size() * sizeof(double)));
    out.flush();
    if (!out) throw io_error("write failed: " + path);
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file: " + path);

    char magic[kMagicLen];
    if (!in.read(magic, static_cast<std::streamsize>(kMagicLen)) ||
        std::memcmp(magic, kModelMagic, kMagicLen) != 0) {
        throw model_format_error("not a model file (bad magic): " + path);
    }
    uint32_t header_len = 0;
    if (!in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len))) {
        throw model_format_error("truncated model file (header length): " + path);
    }
    std::string header_text(header_len, '\0');
    if (!in.read(header_text.data(), header_len)) {
        throw model_format_error("truncated model file (header): " + path);
    }
    json h;
    try {
        h = json::parse(header_text);
    } catch (const json::exception& e) {
        throw model_format_error(std::string("corrupt model header: ") + e.what());
    }

    try {
        if (h.at("format_version").get<uint32_t>() != kModelFormatVersion) {
            throw model_format_error("unsupported model format_version");
        }

        size_t expected = 0;
        for (const auto& s : h.at("sections")) expected += s.at("count").get<size_t>();
        std::vector<double> payload(expected);
        if (!in.read(reinterpret_cast<char*>(payload.data()),
                     static_cast<std::streamsize>(expected * sizeof(double)))) {
            throw model_format_error("truncated model file (payload): " + path);
        }
        in.peek();
        if (!in.eof()) throw model_format_error("trailing bytes after payload: " + path);
        if (payload_checksum(payload) != h.at("payload_checksum").get<uint64_t>()) {
            throw model_format_error("payload checksum mismatch: " + path);
        }
        PayloadReader reader(h.at("sections"), std::move(payload));

        ModelBundle b;
        b.model_kind = h.at("model_kind").get<std::string>();
        b.seed = h.value("seed", uint64_t{0});
        b.normalization = norm_config_from_json(h.at("normalization"));

        if (b.model_kind == "logreg") {
            LogRegModel m;
            m.n_features = h.at("logreg").at("n_features").get<uint32_t>();
            m.weights = reader.take("weights");
            const auto bias = reader.take("bias");
            if (bias.size() != m.bias.size() ||
                m.weights.size() != static_cast<size_t>(kNumLabels) * m.n_features) {
                throw model_format_error("logreg payload has wrong shape");
            }
            std::copy(bias.begin(), bias.end(), m.bias.begin());
            b.vocabulary = vocab_from_json(h.at("vocabulary"));
            b.logreg = std::move(m);
        } else if (b.model_kind == "fasttext") {
            const auto& fj = h.at("fasttext");
            FastTextModel m;
            m.dim = fj.at("dim").get<uint32_t>();
            m.extractor = extractor_from_json(fj.at("extractor"));
            m.skipped_empty = fj.value("skipped_empty", uint64_t{0});
            m.embeddings = reader.take("embeddings");
            m.output = reader.take("output");
            const auto bias = reader.take("bias");
            const auto priors = reader.take("priors");
            if (bias.size() != m.bias.size() || priors.size() != m.priors.size() ||
                m.embeddings.size() != static_cast<size_t>(m.extractor.n_buckets) * m.dim ||
                m.output.size() != static_cast<size_t>(kNumLabels) * m.dim) {
                throw model_format_error("fasttext payload has wrong shape");
            }
            std::copy(bias.begin(), bias.end(), m.bias.begin());
            std::copy(priors.begin(), priors.end(), m.priors.begin());
            b.fasttext = std::move(m);
        } else if (b.model_kind == "transformer") {
            const auto& tj = h.at("transformer");
            TransformerModel m;
            m.cfg = transformer_config_from_json(tj.at("config"));
            m.vocab.id_to_token = tj.at("tokens").get<std::vector<std::string>>();
            for (int i = 3; i < m.vocab.size(); ++i) {
                m.vocab.token_to_id.emplace(m.vocab.id_to_token[i], i);
            }
            for (const auto& t : tj.at("tensors")) {
                m.params.entries.push_back({t.at("name").get<std::string>(),
                                            t.at("offset").get<size_t>(),
                                            t.at("count").get<size_t>()});
            }
            m.params.data = reader.take("params");
            size_t total = 0;
            for (const auto& e : m.params.entries) total += e.count;
            if (total != m.params.data.size()) {
                throw model_format_error("transformer tensor table disagrees with payload");
            }
            b.transformer = std::move(m);
        } else {
            throw model_format_error("unknown model kind: " + b.model_kind);
        }
        return b;
    } catch (const json::exception& e) {
        throw model_format_error(std::string("corrupt model header: ") + e.what());
    }
}

}  // namespace itk
