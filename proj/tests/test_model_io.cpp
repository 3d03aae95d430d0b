#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "itk/errors.h"
#include "itk/model_io.h"
#include "test_support.h"

using namespace itk;
using test::TempDir;
using test::read_text;
using test::write_text;

namespace {

ModelBundle make_logreg_bundle() {
    const std::vector<std::string> docs = {"crash boom now", "feature idea here",
                                           "how to ask",     "crash again today",
                                           "feature for you", "how come señor"};
    ModelBundle b;
    b.model_kind = "logreg";
    b.seed = 42;
    b.normalization.max_tokens = 77;
    b.normalization.field_selection = {Field::title, Field::body};
    b.vocabulary = fit_vocab(docs, 1);
    LabeledFeatures data;
    for (size_t i = 0; i < docs.size(); ++i) {
        data.push_back({tfidf_transform(tokenize(docs[i]), *b.vocabulary),
                        static_cast<int>(i % 3)});
    }
    b.logreg = logreg_train(data, TrainConfig{}, static_cast<uint32_t>(b.vocabulary->size()));
    return b;
}

ModelBundle make_fasttext_bundle() {
    ModelBundle b;
    b.model_kind = "fasttext";
    b.seed = 7;
    HashedNgramExtractor ex;
    ex.n_buckets = 1u << 8;
    ex.hash_seed = 99;
    LabeledTokenDocs docs;
    for (int i = 0; i < 12; ++i) {
        docs.push_back({{"tok" + std::to_string(i % 5), "x"}, i % 3});
    }
    docs.push_back({{}, 0});
    b.fasttext = fasttext_train(docs, ex, fasttext_defaults(), 8);
    return b;
}

ModelBundle make_transformer_bundle() {
    TransformerConfig cfg;
    cfg.vocab_size = 30;
    cfg.max_len = 12;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.n_layers = 1;
    cfg.d_ff = 16;
    cfg.dropout = 0.0;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    const std::vector<CleanRecord> data = {
        {"crash now", 0}, {"boom crash", 0}, {"add feature", 1},
        {"nice feature", 1}, {"how come", 2}, {"how fast", 2},
    };
    ModelBundle b;
    b.model_kind = "transformer";
    b.seed = 5;
    b.transformer = transformer_train(data, cfg, 5);
    return b;
}

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("logreg bundle round-trips with bitwise-identical predictions") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    const auto b = make_logreg_bundle();
    save_model(b, path);
    const auto r = load_model(path);
    CHECK(r.model_kind == "logreg");
    CHECK(r.seed == 42);
    CHECK(r.normalization.max_tokens == 77);
    REQUIRE(r.normalization.field_selection.size() == 2);
    CHECK(r.normalization.field_selection[0] == Field::title);
    REQUIRE(r.logreg.has_value());
    REQUIRE(r.vocabulary.has_value());
    CHECK(r.vocabulary->terms == b.vocabulary->terms);
    CHECK(r.vocabulary->document_frequency == b.vocabulary->document_frequency);
    CHECK(r.vocabulary->n_documents == b.vocabulary->n_documents);
    CHECK(r.logreg->weights == b.logreg->weights);

    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> toks;
        for (int k = 0; k < 4; ++k) {
            toks.push_back(b.vocabulary->terms[rng.next_below(b.vocabulary->size())]);
        }
        const auto x = tfidf_transform(toks, *b.vocabulary);
        const auto p = logreg_predict(*b.logreg, x);
        const auto q = logreg_predict(*r.logreg, x);
        REQUIRE(p.label_code == q.label_code);
        for (int c = 0; c < 3; ++c) REQUIRE(p.probs[c] == q.probs[c]);
    }
}

TEST_CASE("fasttext bundle round-trips with bitwise-identical predictions") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    const auto b = make_fasttext_bundle();
    save_model(b, path);
    const auto r = load_model(path);
    REQUIRE(r.fasttext.has_value());
    CHECK(r.fasttext->dim == b.fasttext->dim);
    CHECK(r.fasttext->extractor.n_buckets == b.fasttext->extractor.n_buckets);
    CHECK(r.fasttext->extractor.hash_seed == b.fasttext->extractor.hash_seed);
    CHECK(r.fasttext->extractor.ngram_orders == b.fasttext->extractor.ngram_orders);
    CHECK(r.fasttext->skipped_empty == 1);
    CHECK(r.fasttext->priors == b.fasttext->priors);

    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> toks;
        for (int k = 0; k < 3; ++k) toks.push_back("tok" + std::to_string(rng.next_below(8)));
        const auto x = hash_ngrams(toks, b.fasttext->extractor);
        const auto p = fasttext_predict(*b.fasttext, x);
        const auto q = fasttext_predict(*r.fasttext, x);
        REQUIRE(p.label_code == q.label_code);
        for (int c = 0; c < 3; ++c) REQUIRE(p.probs[c] == q.probs[c]);
    }
    // prior fallback survives the round trip bit for bit
    const auto p0 = fasttext_predict(*b.fasttext, {});
    const auto q0 = fasttext_predict(*r.fasttext, {});
    for (int c = 0; c < 3; ++c) CHECK(p0.probs[c] == q0.probs[c]);
}

TEST_CASE("transformer bundle round-trips with bitwise-identical logits") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    const auto b = make_transformer_bundle();
    save_model(b, path);
    const auto r = load_model(path);
    REQUIRE(r.transformer.has_value());
    CHECK(r.transformer->cfg.d_model == b.transformer->cfg.d_model);
    CHECK(r.transformer->vocab.id_to_token == b.transformer->vocab.id_to_token);
    CHECK(r.transformer->params.data == b.transformer->params.data);
    for (const char* text : {"crash now", "add feature", "how come", "unseen words", ""}) {
        const auto p = transformer_predict(*b.transformer, text);
        const auto q = transformer_predict(*r.transformer, text);
        REQUIRE(p.label_code == q.label_code);
        for (int c = 0; c < 3; ++c) REQUIRE(p.probs[c] == q.probs[c]);
    }
}

TEST_CASE("saving twice produces identical bytes") {
    TempDir tmp;
    const auto b = make_logreg_bundle();
    save_model(b, tmp.file("a.bin"));
    save_model(b, tmp.file("b.bin"));
    CHECK(read_text(tmp.file("a.bin")) == read_text(tmp.file("b.bin")));
}

TEST_CASE("missing file raises io_error") {
    TempDir tmp;
    CHECK_THROWS_AS(load_model(tmp.file("nope.bin")), io_error);
}

TEST_CASE("bad magic raises model_format_error") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    save_model(make_logreg_bundle(), path);
    auto bytes = read_text(path);
    bytes[0] = 'X';
    write_text(path, bytes);
    CHECK_THROWS_AS(load_model(path), model_format_error);
}

TEST_CASE("truncation anywhere raises model_format_error") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    save_model(make_logreg_bundle(), path);
    const auto bytes = read_text(path);
    // drop the final payload byte, half the file, and most of the header
    for (const size_t keep : {bytes.size() - 1, bytes.size() / 2, size_t{12}}) {
        write_text(path, bytes.substr(0, keep));
        CHECK_THROWS_AS(load_model(path), model_format_error);
    }
}

TEST_CASE("trailing bytes raise model_format_error") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    save_model(make_logreg_bundle(), path);
    write_text(path, read_text(path) + "extra");
    CHECK_THROWS_AS(load_model(path), model_format_error);
}

TEST_CASE("payload corruption fails the checksum") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    save_model(make_logreg_bundle(), path);
    auto bytes = read_text(path);
    bytes[bytes.size() - 3] = static_cast<char>(bytes[bytes.size() - 3] ^ 0x40);
    write_text(path, bytes);
    try {
        load_model(path);
        FAIL("expected model_format_error");
    } catch (const model_format_error& e) {
        CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
}

TEST_CASE("unsupported format version is rejected") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    save_model(make_logreg_bundle(), path);
    const auto bytes = read_text(path);
    // splice a bumped version into the JSON header, keeping the layout valid
    const size_t magic_len = 10;
    uint32_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + magic_len, 4);
    const std::string header_text = bytes.substr(magic_len + 4, header_len);
    auto h = nlohmann::json::parse(header_text);
    h["format_version"] = 2;
    const std::string new_header = h.dump();
    const uint32_t new_len = static_cast<uint32_t>(new_header.size());
    std::string rebuilt = bytes.substr(0, magic_len);
    rebuilt.append(reinterpret_cast<const char*>(&new_len), 4);
    rebuilt += new_header;
    rebuilt += bytes.substr(magic_len + 4 + header_len);
    write_text(path, rebuilt);
    try {
        load_model(path);
        FAIL("expected model_format_error");
    } catch (const model_format_error& e) {
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
}

TEST_CASE("garbage header json is reported as corrupt") {
    TempDir tmp;
    const auto path = tmp.file("m.bin");
    save_model(make_logreg_bundle(), path);
    auto bytes = read_text(path);
    bytes[14] = '!';  // inside the JSON header
    write_text(path, bytes);
    CHECK_THROWS_AS(load_model(path), model_format_error);
}

TEST_CASE("incomplete bundles are rejected at save time") {
    TempDir tmp;
    ModelBundle b;
    b.model_kind = "logreg";  // no weights attached
    CHECK_THROWS_AS(save_model(b, tmp.file("x.bin")), data_error);
    b.model_kind = "nonsense";
    CHECK_THROWS_AS(save_model(b, tmp.file("y.bin")), data_error);
}

}  // TEST_SUITE
