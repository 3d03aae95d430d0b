#include "itk/transformer.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "itk/errors.h"
#include "itk/features.h"

namespace itk {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

}  // namespace

void TransformerConfig::validate() const {
    if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
        throw data_error("d_model must be a positive multiple of n_heads");
    }
    if (max_len < 1) throw data_error("max_len must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw data_error("dropout must lie in [0, 1)");
    if (n_layers < 1 || d_ff < 1 || vocab_size < 1) {
        throw data_error("n_layers, d_ff and vocab_size must be >= 1");
    }
    if (n_classes != kNumLabels) throw data_error("n_classes is fixed to 3");
    if (epochs < 0 || batch_size < 1) throw data_error("epochs >= 0 and batch_size >= 1 required");
}

TokenVocab build_token_vocab(const std::vector<CleanRecord>& data, int max_terms) {
    std::unordered_map<std::string, uint64_t> freq;
    for (const auto& r : data) {
        for (auto& tok : tokenize(r.text)) ++freq[std::move(tok)];
    }
    std::vector<std::pair<std::string_view, uint64_t>> ranked;
    ranked.reserve(freq.size());
    for (const auto& [term, count] : freq) ranked.emplace_back(term, count);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<size_t>(max_terms)) ranked.resize(max_terms);

    TokenVocab v;
    v.id_to_token = {"<PAD>", "<CLS>", "<UNK>"};
    for (const auto& [term, count] : ranked) {
        v.token_to_id.emplace(std::string(term), v.size());
        v.id_to_token.emplace_back(term);
    }
    return v;
}

std::vector<int> encode_tokens(const std::string& text, const TokenVocab& vocab,
                               const TransformerConfig& cfg) {
    std::vector<int> ids{TokenVocab::kCls};
    for (const auto& tok : tokenize(text)) {
        if (ids.size() >= static_cast<size_t>(cfg.max_len)) break;
        const auto it = vocab.token_to_id.find(tok);
        ids.push_back(it == vocab.token_to_id.end() ? TokenVocab::kUnk : it->second);
    }
    return ids;
}

size_t ParamPack::add(const std::string& name, size_t count) {
    const size_t offset = data.size();
    entries.push_back({name, offset, count});
    data.resize(offset + count, 0.0);
    return offset;
}

const ParamPack::Entry& ParamPack::entry(std::string_view name) const {
    for (const auto& e : entries) {
        if (e.name == name) return e;
    }
    throw data_error("unknown parameter tensor: " + std::string(name));
}

namespace {

struct LayerOffsets {
    size_t wq, bq, wk, bk, wv, bv, wo, bo;
    size_t ln1g, ln1b, ff1w, ff1b, ff2w, ff2b, ln2g, ln2b;
};

struct Offsets {
    size_t tok, pos;
    std::vector<LayerOffsets> layers;
    size_t poolw, poolb, outw, outb;
};

Offsets offsets_of(const ParamPack& p, int n_layers) {
    Offsets off;
    off.tok = p.entry("tok_emb").offset;
    off.pos = p.entry("pos_emb").offset;
    off.layers.resize(n_layers);
    for (int l = 0; l < n_layers; ++l) {
        const std::string pre = "l" + std::to_string(l) + ".";
        auto& lo = off.layers[l];
        lo.wq = p.entry(pre + "wq").offset;
        lo.bq = p.entry(pre + "bq").offset;
        lo.wk = p.entry(pre + "wk").offset;
        lo.bk = p.entry(pre + "bk").offset;
        lo.wv = p.entry(pre + "wv").offset;
        lo.bv = p.entry(pre + "bv").offset;
        lo.wo = p.entry(pre + "wo").offset;
        lo.bo = p.entry(pre + "bo").offset;
        lo.ln1g = p.entry(pre + "ln1.g").offset;
        lo.ln1b = p.entry(pre + "ln1.b").offset;
        lo.ff1w = p.entry(pre + "ff1.w").offset;
        lo.ff1b = p.entry(pre + "ff1.b").offset;
        lo.ff2w = p.entry(pre + "ff2.w").offset;
        lo.ff2b = p.entry(pre + "ff2.b").offset;
        lo.ln2g = p.entry(pre + "ln2.g").offset;
        lo.ln2b = p.entry(pre + "ln2.b").offset;
    }
    off.poolw = p.entry("pool.w").offset;
    off.poolb = p.entry("pool.b").offset;
    off.outw = p.entry("out.w").offset;
    off.outb = p.entry("out.b").offset;
    return off;
}

// y[t] = W x[t] + b for every position, W row-major out_dim x in_dim
void linear_forward(const double* w, const double* b, const double* x, double* y, int rows,
                    int in_dim, int out_dim) {
    for (int t = 0; t < rows; ++t) {
        const double* xt = x + static_cast<size_t>(t) * in_dim;
        double* yt = y + static_cast<size_t>(t) * out_dim;
        for (int o = 0; o < out_dim; ++o) {
            double acc = b[o];
            const double* wrow = w + static_cast<size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) acc += wrow[i] * xt[i];
            yt[o] = acc;
        }
    }
}

void linear_backward(const double* w, const double* x, const double* dy, double* dw, double* db,
                     double* dx, int rows, int in_dim, int out_dim) {
    for (int t = 0; t < rows; ++t) {
        const double* xt = x + static_cast<size_t>(t) * in_dim;
        const double* dyt = dy + static_cast<size_t>(t) * out_dim;
        double* dxt = dx ? dx + static_cast<size_t>(t) * in_dim : nullptr;
        for (int o = 0; o < out_dim; ++o) {
            const double g = dyt[o];
            db[o] += g;
            double* dwrow = dw + static_cast<size_t>(o) * in_dim;
            const double* wrow = w + static_cast<size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) {
                dwrow[i] += g * xt[i];
                if (dxt) dxt[i] += wrow[i] * g;
            }
        }
    }
}

void layernorm_forward(const double* g, const double* b, const double* x, double* y, double* xhat,
                       double* rstd, int rows, int dim) {
    for (int t = 0; t < rows; ++t) {
        const double* xt = x + static_cast<size_t>(t) * dim;
        double mean = 0.0;
        for (int j = 0; j < dim; ++j) mean += xt[j];
        mean /= dim;
        double var = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double c = xt[j] - mean;
            var += c * c;
        }
        var /= dim;
        const double r = 1.0 / std::sqrt(var + kLnEps);
        rstd[t] = r;
        double* xh = xhat + static_cast<size_t>(t) * dim;
        double* yt = y + static_cast<size_t>(t) * dim;
        for (int j = 0; j < dim; ++j) {
            xh[j] = (xt[j] - mean) * r;
            yt[j] = g[j] * xh[j] + b[j];
        }
    }
}

void layernorm_backward(const double* g, const double* xhat, const double* rstd, const double* dy,
                        double* dx, double* dg, double* db, int rows, int dim) {
    for (int t = 0; t < rows; ++t) {
        const double* xh = xhat + static_cast<size_t>(t) * dim;
        const double* dyt = dy + static_cast<size_t>(t) * dim;
        double* dxt = dx + static_cast<size_t>(t) * dim;
        double m1 = 0.0, m2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double dxh = dyt[j] * g[j];
            m1 += dxh;
            m2 += dxh * xh[j];
            dg[j] += dyt[j] * xh[j];
            db[j] += dyt[j];
        }
        m1 /= dim;
        m2 /= dim;
        for (int j = 0; j < dim; ++j) {
            const double dxh = dyt[j] * g[j];
            dxt[j] += rstd[t] * (dxh - m1 - xh[j] * m2);
        }
    }
}

struct LayerTrace {
    std::vector<double> xin, q, k, v;
    std::vector<double> probs;       // heads x L x L, pre-dropout
    std::vector<double> probs_mask;  // empty when dropout is off
    std::vector<double> ctx, attn_out, attn_mask;
    std::vector<double> sum1, ln1_xhat, ln1_rstd, x1;
    std::vector<double> ff_pre, ff_act, f2, ff_mask;
    std::vector<double> sum2, ln2_xhat, ln2_rstd, x2;
};

struct Trace {
    int L = 0;
    std::vector<char> pad;
    std::vector<double> emb_mask;
    std::vector<double> x0;
    std::vector<LayerTrace> layers;
    std::vector<double> pool_pre, pooled;
    std::array<double, kNumLabels> logits{};
};

void fill_dropout_mask(std::vector<double>& mask, size_t count, double p, Rng* rng) {
    if (!rng || p <= 0.0) {
        mask.clear();
        return;
    }
    mask.resize(count);
    const double keep = 1.0 / (1.0 - p);
    for (size_t i = 0; i < count; ++i) mask[i] = rng->next_double() < p ? 0.0 : keep;
}

void apply_mask(double* x, const std::vector<double>& mask) {
    for (size_t i = 0; i < mask.size(); ++i) x[i] *= mask[i];
}

void check_batch_item(const TransformerModel& m, const std::vector<int>& ids) {
    if (ids.empty()) throw data_error("empty id sequence");
    if (ids.size() > static_cast<size_t>(m.cfg.max_len)) {
        throw data_error("sequence longer than max_len; encode_tokens must truncate first");
    }
    for (int id : ids) {
        if (id < 0 || id >= m.vocab.size()) throw data_error("token id out of vocabulary range");
    }
}

void forward_one(const TransformerModel& m, const Offsets& off, const std::vector<int>& ids,
                 Trace& tr, Rng* drop) {
    const int L = static_cast<int>(ids.size());
    const int d = m.cfg.d_model;
    const int H = m.cfg.n_heads;
    const int dh = d / H;
    const int dff = m.cfg.d_ff;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    const double p_drop = m.cfg.dropout;
    const double* P = m.params.data.data();

    tr.L = L;
    tr.pad.resize(L);
    for (int t = 0; t < L; ++t) tr.pad[t] = ids[t] == TokenVocab::kPad ? 1 : 0;

    tr.x0.assign(static_cast<size_t>(L) * d, 0.0);
    for (int t = 0; t < L; ++t) {
        const double* tok = P + off.tok + static_cast<size_t>(ids[t]) * d;
        const double* pos = P + off.pos + static_cast<size_t>(t) * d;
        double* x = tr.x0.data() + static_cast<size_t>(t) * d;
        for (int j = 0; j < d; ++j) x[j] = tok[j] + pos[j];
    }
    fill_dropout_mask(tr.emb_mask, tr.x0.size(), p_drop, drop);
    apply_mask(tr.x0.data(), tr.emb_mask);

    tr.layers.assign(m.cfg.n_layers, {});
    const std::vector<double>* below = &tr.x0;
    for (int l = 0; l < m.cfg.n_layers; ++l) {
        const auto& lo = off.layers[l];
        LayerTrace& lt = tr.layers[l];
        lt.xin = *below;
        const size_t ld = static_cast<size_t>(L) * d;

        lt.q.resize(ld);
        lt.k.resize(ld);
        lt.v.resize(ld);
        linear_forward(P + lo.wq, P + lo.bq, lt.xin.data(), lt.q.data(), L, d, d);
        linear_forward(P + lo.wk, P + lo.bk, lt.xin.data(), lt.k.data(), L, d, d);
        linear_forward(P + lo.wv, P + lo.bv, lt.xin.data(), lt.v.data(), L, d, d);

        lt.probs.assign(static_cast<size_t>(H) * L * L, 0.0);
        std::vector<double> scores(L);
        for (int h = 0; h < H; ++h) {
            const int base = h * dh;
            for (int t = 0; t < L; ++t) {
                const double* qt = lt.q.data() + static_cast<size_t>(t) * d + base;
                double max_score = -std::numeric_limits<double>::infinity();
                for (int s = 0; s < L; ++s) {
                    if (tr.pad[s]) {
                        scores[s] = -std::numeric_limits<double>::infinity();
                        continue;
                    }
                    const double* ks = lt.k.data() + static_cast<size_t>(s) * d + base;
                    double dot = 0.0;
                    for (int j = 0; j < dh; ++j) dot += qt[j] * ks[j];
                    scores[s] = dot * inv_sqrt_dh;
                    max_score = std::max(max_score, scores[s]);
                }
                double denom = 0.0;
                double* prow = lt.probs.data() + (static_cast<size_t>(h) * L + t) * L;
                for (int s = 0; s < L; ++s) {
                    prow[s] = tr.pad[s] ? 0.0 : std::exp(scores[s] - max_score);
                    denom += prow[s];
                }
                for (int s = 0; s < L; ++s) prow[s] /= denom;
            }
        }
        fill_dropout_mask(lt.probs_mask, lt.probs.size(), p_drop, drop);

        lt.ctx.assign(ld, 0.0);
        for (int h = 0; h < H; ++h) {
            const int base = h * dh;
            for (int t = 0; t < L; ++t) {
                const double* prow = lt.probs.data() + (static_cast<size_t>(h) * L + t) * L;
                const double* mrow = lt.probs_mask.empty()
                                         ? nullptr
                                         : lt.probs_mask.data() + (static_cast<size_t>(h) * L + t) * L;
                double* ct = lt.ctx.data() + static_cast<size_t>(t) * d + base;
                for (int s = 0; s < L; ++s) {
                    const double p = mrow ? prow[s] * mrow[s] : prow[s];
                    if (p == 0.0) continue;
                    const double* vs = lt.v.data() + static_cast<size_t>(s) * d + base;
                    for (int j = 0; j < dh; ++j) ct[j] += p * vs[j];
                }
            }
        }

        lt.attn_out.resize(ld);
        linear_forward(P + lo.wo, P + lo.bo, lt.ctx.data(), lt.attn_out.data(), L, d, d);
        fill_dropout_mask(lt.attn_mask, ld, p_drop, drop);

        lt.sum1.resize(ld);
        for (size_t i = 0; i < ld; ++i) {
            const double a = lt.attn_mask.empty() ? lt.attn_out[i] : lt.attn_out[i] * lt.attn_mask[i];
            lt.sum1[i] = lt.xin[i] + a;
        }
        lt.ln1_xhat.resize(ld);
        lt.ln1_rstd.resize(L);
        lt.x1.resize(ld);
        layernorm_forward(P + lo.ln1g, P + lo.ln1b, lt.sum1.data(), lt.x1.data(),
                          lt.ln1_xhat.data(), lt.ln1_rstd.data(), L, d);

        lt.ff_pre.resize(static_cast<size_t>(L) * dff);
        linear_forward(P + lo.ff1w, P + lo.ff1b, lt.x1.data(), lt.ff_pre.data(), L, d, dff);
        lt.ff_act.resize(lt.ff_pre.size());
        for (size_t i = 0; i < lt.ff_pre.size(); ++i) lt.ff_act[i] = gelu(lt.ff_pre[i]);
        lt.f2.resize(ld);
        linear_forward(P + lo.ff2w, P + lo.ff2b, lt.ff_act.data(), lt.f2.data(), L, dff, d);
        fill_dropout_mask(lt.ff_mask, ld, p_drop, drop);

        lt.sum2.resize(ld);
        for (size_t i = 0; i < ld; ++i) {
            const double f = lt.ff_mask.empty() ? lt.f2[i] : lt.f2[i] * lt.ff_mask[i];
            lt.sum2[i] = lt.x1[i] + f;
        }
        lt.ln2_xhat.resize(ld);
        lt.ln2_rstd.resize(L);
        lt.x2.resize(ld);
        layernorm_forward(P + lo.ln2g, P + lo.ln2b, lt.sum2.data(), lt.x2.data(),
                          lt.ln2_xhat.data(), lt.ln2_rstd.data(), L, d);
        below = &lt.x2;
    }

    const double* cls = below->data();  // position 0
    tr.pool_pre.resize(d);
    linear_forward(P + off.poolw, P + off.poolb, cls, tr.pool_pre.data(), 1, d, d);
    tr.pooled.resize(d);
    for (int j = 0; j < d; ++j) tr.pooled[j] = std::tanh(tr.pool_pre[j]);
    linear_forward(P + off.outw, P + off.outb, tr.pooled.data(), tr.logits.data(), 1, d,
                   kNumLabels);
}

void backward_one(const TransformerModel& m, const Offsets& off, const std::vector<int>& ids,
                  const Trace& tr, const std::array<double, kNumLabels>& dlogits, double* G) {
    const int L = tr.L;
    const int d = m.cfg.d_model;
    const int H = m.cfg.n_heads;
    const int dh = d / H;
    const int dff = m.cfg.d_ff;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    const double* P = m.params.data.data();
    const size_t ld = static_cast<size_t>(L) * d;

    // classification head
    std::vector<double> dpooled(d, 0.0);
    linear_backward(P + off.outw, tr.pooled.data(), dlogits.data(), G + off.outw, G + off.outb,
                    dpooled.data(), 1, d, kNumLabels);
    std::vector<double> dpool_pre(d);
    for (int j = 0; j < d; ++j) {
        dpool_pre[j] = dpooled[j] * (1.0 - tr.pooled[j] * tr.pooled[j]);
    }
    const double* cls = tr.layers.back().x2.data();
    std::vector<double> dx(ld, 0.0);  // gradient wrt the top layer's x2
    linear_backward(P + off.poolw, cls, dpool_pre.data(), G + off.poolw, G + off.poolb, dx.data(),
                    1, d, d);

    std::vector<double> dsum(ld), dmid(ld), dff_act(static_cast<size_t>(L) * dff),
        dff_pre(static_cast<size_t>(L) * dff), dctx(ld), dq(ld), dk(ld), dv(ld), dxin(ld);
    for (int l = m.cfg.n_layers - 1; l >= 0; --l) {
        const auto& lo = off.layers[l];
        const LayerTrace& lt = tr.layers[l];

        // LN2: dx -> dsum2
        std::fill(dsum.begin(), dsum.end(), 0.0);
        layernorm_backward(P + lo.ln2g, lt.ln2_xhat.data(), lt.ln2_rstd.data(), dx.data(),
                           dsum.data(), G + lo.ln2g, G + lo.ln2b, L, d);

        // residual: dsum feeds x1 directly and f2 through the dropout mask
        std::copy(dsum.begin(), dsum.end(), dmid.begin());  // d x1 (accumulating)
        std::vector<double>& df2 = dsum;                    // reuse in place
        if (!lt.ff_mask.empty()) {
            for (size_t i = 0; i < ld; ++i) df2[i] *= lt.ff_mask[i];
        }
        std::fill(dff_act.begin(), dff_act.end(), 0.0);
        linear_backward(P + lo.ff2w, lt.ff_act.data(), df2.data(), G + lo.ff2w, G + lo.ff2b,
                        dff_act.data(), L, dff, d);
        for (size_t i = 0; i < dff_pre.size(); ++i) {
            dff_pre[i] = dff_act[i] * gelu_grad(lt.ff_pre[i]);
        }
        linear_backward(P + lo.ff1w, lt.x1.data(), dff_pre.data(), G + lo.ff1w, G + lo.ff1b,
                        dmid.data(), L, d, dff);

        // LN1: dmid (= d x1) -> dsum1
        std::fill(dsum.begin(), dsum.end(), 0.0);
        layernorm_backward(P + lo.ln1g, lt.ln1_xhat.data(), lt.ln1_rstd.data(), dmid.data(),
                           dsum.data(), G + lo.ln1g, G + lo.ln1b, L, d);

        // residual: dsum feeds xin directly and attn_out through its mask
        std::copy(dsum.begin(), dsum.end(), dxin.begin());
        std::vector<double>& dattn = dsum;
        if (!lt.attn_mask.empty()) {
            for (size_t i = 0; i < ld; ++i) dattn[i] *= lt.attn_mask[i];
        }
        std::fill(dctx.begin(), dctx.end(), 0.0);
        linear_backward(P + lo.wo, lt.ctx.data(), dattn.data(), G + lo.wo, G + lo.bo, dctx.data(),
                        L, d, d);

        std::fill(dq.begin(), dq.end(), 0.0);
        std::fill(dk.begin(), dk.end(), 0.0);
        std::fill(dv.begin(), dv.end(), 0.0);
        std::vector<double> dprobs(L), dscores(L);
        for (int h = 0; h < H; ++h) {
            const int base = h * dh;
            for (int t = 0; t < L; ++t) {
                const double* prow = lt.probs.data() + (static_cast<size_t>(h) * L + t) * L;
                const double* mrow = lt.probs_mask.empty()
                                         ? nullptr
                                         : lt.probs_mask.data() + (static_cast<size_t>(h) * L + t) * L;
                const double* dct = dctx.data() + static_cast<size_t>(t) * d + base;
                for (int s = 0; s < L; ++s) {
                    const double keep = mrow ? mrow[s] : 1.0;
                    const double p_used = prow[s] * keep;
                    const double* vs = lt.v.data() + static_cast<size_t>(s) * d + base;
                    double acc = 0.0;
                    double* dvs = dv.data() + static_cast<size_t>(s) * d + base;
                    for (int j = 0; j < dh; ++j) {
                        acc += dct[j] * vs[j];
                        dvs[j] += p_used * dct[j];
                    }
                    dprobs[s] = acc * keep;
                }
                double dot = 0.0;
                for (int s = 0; s < L; ++s) dot += prow[s] * dprobs[s];
                for (int s = 0; s < L; ++s) dscores[s] = prow[s] * (dprobs[s] - dot);
                double* dqt = dq.data() + static_cast<size_t>(t) * d + base;
                const double* qt = lt.q.data() + static_cast<size_t>(t) * d + base;
                for (int s = 0; s < L; ++s) {
                    if (dscores[s] == 0.0) continue;
                    const double g = dscores[s] * inv_sqrt_dh;
                    const double* ks = lt.k.data() + static_cast<size_t>(s) * d + base;
                    double* dks = dk.data() + static_cast<size_t>(s) * d + base;
                    for (int j = 0; j < dh; ++j) {
                        dqt[j] += g * ks[j];
                        dks[j] += g * qt[j];
                    }
                }
            }
        }

        linear_backward(P + lo.wq, lt.xin.data(), dq.data(), G + lo.wq, G + lo.bq, dxin.data(), L,
                        d, d);
        linear_backward(P + lo.wk, lt.xin.data(), dk.data(), G + lo.wk, G + lo.bk, dxin.data(), L,
                        d, d);
        linear_backward(P + lo.wv, lt.xin.data(), dv.data(), G + lo.wv, G + lo.bv, dxin.data(), L,
                        d, d);
        std::copy(dxin.begin(), dxin.end(), dx.begin());
    }

    if (!tr.emb_mask.empty()) {
        for (size_t i = 0; i < ld; ++i) dx[i] *= tr.emb_mask[i];
    }
    for (int t = 0; t < L; ++t) {
        const double* dxt = dx.data() + static_cast<size_t>(t) * d;
        double* dtok = G + off.tok + static_cast<size_t>(ids[t]) * d;
        double* dpos = G + off.pos + static_cast<size_t>(t) * d;
        for (int j = 0; j < d; ++j) {
            dtok[j] += dxt[j];
            dpos[j] += dxt[j];
        }
    }
}

std::array<double, kNumLabels> stable_softmax(const std::array<double, kNumLabels>& z) {
    std::array<double, kNumLabels> p{};
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (int c = 0; c < kNumLabels; ++c) {
        p[c] = std::exp(z[c] - m);
        s += p[c];
    }
    for (double& v : p) v /= s;
    return p;
}

}  // namespace

TransformerModel transformer_init(const TransformerConfig& cfg, TokenVocab vocab, uint64_t seed) {
    cfg.validate();
    TransformerModel m;
    m.cfg = cfg;
    m.vocab = std::move(vocab);

    const size_t d = cfg.d_model;
    ParamPack& p = m.params;
    p.add("tok_emb", static_cast<size_t>(m.vocab.size()) * d);
    p.add("pos_emb", static_cast<size_t>(cfg.max_len) * d);
    for (int l = 0; l < cfg.n_layers; ++l) {
        const std::string pre = "l" + std::to_string(l) + ".";
        p.add(pre + "wq", d * d);
        p.add(pre + "bq", d);
        p.add(pre + "wk", d * d);
        p.add(pre + "bk", d);
        p.add(pre + "wv", d * d);
        p.add(pre + "bv", d);
        p.add(pre + "wo", d * d);
        p.add(pre + "bo", d);
        p.add(pre + "ln1.g", d);
        p.add(pre + "ln1.b", d);
        p.add(pre + "ff1.w", static_cast<size_t>(cfg.d_ff) * d);
        p.add(pre + "ff1.b", cfg.d_ff);
        p.add(pre + "ff2.w", d * static_cast<size_t>(cfg.d_ff));
        p.add(pre + "ff2.b", d);
        p.add(pre + "ln2.g", d);
        p.add(pre + "ln2.b", d);
    }
    p.add("pool.w", d * d);
    p.add("pool.b", d);
    p.add("out.w", static_cast<size_t>(kNumLabels) * d);
    p.add("out.b", kNumLabels);

    Rng rng(seed);
    const auto gaussian_fill = [&](std::string_view name) {
        const auto& e = p.entry(name);
        for (size_t i = 0; i < e.count; ++i) p.data[e.offset + i] = rng.next_gaussian(0.0, 0.02);
    };
    const auto ones_fill = [&](std::string_view name) {
        const auto& e = p.entry(name);
        std::fill_n(p.data.begin() + static_cast<ptrdiff_t>(e.offset), e.count, 1.0);
    };
    gaussian_fill("tok_emb");
    gaussian_fill("pos_emb");
    for (int l = 0; l < cfg.n_layers; ++l) {
        const std::string pre = "l" + std::to_string(l) + ".";
        for (const char* w : {"wq", "wk", "wv", "wo", "ff1.w", "ff2.w"}) gaussian_fill(pre + w);
        ones_fill(pre + "ln1.g");
        ones_fill(pre + "ln2.g");
    }
    gaussian_fill("pool.w");
    gaussian_fill("out.w");
    return m;
}

std::vector<std::array<double, kNumLabels>> transformer_forward(
    const TransformerModel& m, const std::vector<std::vector<int>>& batch) {
    m.cfg.validate();
    const Offsets off = offsets_of(m.params, m.cfg.n_layers);
    std::vector<std::array<double, kNumLabels>> out;
    out.reserve(batch.size());
    Trace tr;
    for (const auto& ids : batch) {
        check_batch_item(m, ids);
        forward_one(m, off, ids, tr, nullptr);
        out.push_back(tr.logits);
    }
    return out;
}

std::vector<double> attention_rows(const TransformerModel& m, const std::vector<int>& ids,
                                   int layer, int head) {
    if (layer < 0 || layer >= m.cfg.n_layers || head < 0 || head >= m.cfg.n_heads) {
        throw data_error("attention_rows: layer or head out of range");
    }
    check_batch_item(m, ids);
    const Offsets off = offsets_of(m.params, m.cfg.n_layers);
    Trace tr;
    forward_one(m, off, ids, tr, nullptr);
    const int L = tr.L;
    const double* src =
        tr.layers[layer].probs.data() + static_cast<size_t>(head) * L * L;
    return {src, src + static_cast<size_t>(L) * L};
}

double transformer_loss_and_grad(const TransformerModel& m,
                                 const std::vector<std::vector<int>>& batch,
                                 const std::vector<int>& labels, std::vector<double>& grad,
                                 Rng* dropout_rng) {
    if (batch.size() != labels.size()) {
        throw data_error("batch and label counts differ");
    }
    if (batch.empty()) throw data_error("empty batch");
    const Offsets off = offsets_of(m.params, m.cfg.n_layers);
    grad.assign(m.params.data.size(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    Trace tr;
    for (size_t i = 0; i < batch.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= kNumLabels) throw data_error("label code out of range");
        check_batch_item(m, batch[i]);
        forward_one(m, off, batch[i], tr, dropout_rng);
        const auto p = stable_softmax(tr.logits);
        loss -= std::log(std::max(p[y], 1e-300)) * inv_b;
        std::array<double, kNumLabels> dlogits{};
        for (int c = 0; c < kNumLabels; ++c) {
            dlogits[c] = (p[c] - (c == y ? 1.0 : 0.0)) * inv_b;
        }
        backward_one(m, off, batch[i], tr, dlogits, grad.data());
    }
    return loss;
}

TransformerModel transformer_train(const std::vector<CleanRecord>& data,
                                   const TransformerConfig& cfg, uint64_t seed,
                                   std::vector<double>* epoch_loss) {
    cfg.validate();
    if (data.empty()) throw data_error("empty training data");
    std::array<bool, kNumLabels> seen{};
    for (const auto& r : data) {
        if (r.label_code < 0 || r.label_code >= kNumLabels) {
            throw data_error("label code out of range");
        }
        seen[r.label_code] = true;
    }
    for (int c = 0; c < kNumLabels; ++c) {
        if (!seen[c]) {
            throw data_error("class " + std::string(label_name(static_cast<Label>(c))) +
                             " absent from training data");
        }
    }

    TransformerModel m = transformer_init(cfg, build_token_vocab(data, cfg.vocab_size), seed);
    std::vector<std::vector<int>> encoded;
    encoded.reserve(data.size());
    std::vector<int> labels;
    labels.reserve(data.size());
    for (const auto& r : data) {
        encoded.push_back(encode_tokens(r.text, m.vocab, cfg));
        labels.push_back(r.label_code);
    }

    const size_t n_params = m.params.data.size();
    std::vector<double> grad, adam_m(n_params, 0.0), adam_v(n_params, 0.0);
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double b1t = 1.0, b2t = 1.0;

    Rng rng(seed + 0x9E3779B97F4A7C15ULL);
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<int>> batch;
    std::vector<int> batch_labels;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            batch_labels.clear();
            for (size_t i = start; i < end; ++i) {
                batch.push_back(encoded[order[i]]);
                batch_labels.push_back(labels[order[i]]);
            }
            const double loss = transformer_loss_and_grad(m, batch, batch_labels, grad,
                                                          cfg.dropout > 0.0 ? &rng : nullptr);
            loss_sum += loss * static_cast<double>(batch.size());
            b1t *= b1;
            b2t *= b2;
            for (size_t j = 0; j < n_params; ++j) {
                adam_m[j] = b1 * adam_m[j] + (1.0 - b1) * grad[j];
                adam_v[j] = b2 * adam_v[j] + (1.0 - b2) * grad[j] * grad[j];
                const double mhat = adam_m[j] / (1.0 - b1t);
                const double vhat = adam_v[j] / (1.0 - b2t);
                m.params.data[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + eps);
            }
        }
        if (epoch_loss) epoch_loss->push_back(loss_sum / static_cast<double>(data.size()));
    }
    return m;
}

Prediction transformer_predict(const TransformerModel& m, const std::string& text) {
    const auto ids = encode_tokens(text, m.vocab, m.cfg);
    const Offsets off = offsets_of(m.params, m.cfg.n_layers);
    Trace tr;
    forward_one(m, off, ids, tr, nullptr);
    Prediction out;
    out.probs = stable_softmax(tr.logits);
    out.label_code = 0;
    for (int c = 1; c < kNumLabels; ++c) {
        if (out.probs[c] > out.probs[out.label_code]) out.label_code = c;
    }
    return out;
}

}  // namespace itk
