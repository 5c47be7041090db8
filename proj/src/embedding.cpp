#include "embedding.hpp"

#include "error.hpp"

namespace octo {

TokenIndices token_indices(const Token& tok, const Token* successor, int max_depth) {
    int v = int(tok.value);
    if (v < 1 || v > 3) throw_invalid("token value must be 1, 2 or 3");
    int end = int(end_spatial_id(max_depth));
    TokenIndices out;
    out.value = v;
    out.px = int(tok.idx);
    out.py = int(tok.idy);
    out.pz = int(tok.idz);
    if (successor != nullptr) {
        out.sx = int(successor->idx);
        out.sy = int(successor->idy);
        out.sz = int(successor->idz);
    } else {
        out.sx = out.sy = out.sz = end;
    }
    return out;
}

std::vector<TokenIndices> sequence_indices(const TokenSequence& seq, size_t begin, size_t end, int max_depth) {
    if (begin > end || end > seq.tokens.size()) throw_invalid("sequence_indices: bad range");
    std::vector<TokenIndices> out;
    out.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) {
        const Token* succ = (i + 1 < seq.tokens.size()) ? &seq.tokens[i + 1] : nullptr;
        out.push_back(token_indices(seq.tokens[i], succ, max_depth));
    }
    return out;
}

Var embed_rows(Tape& tape, const WiredEmbeddings& emb, const std::vector<TokenIndices>& idx) {
    size_t n = idx.size();
    std::vector<int> v(n), px(n), py(n), pz(n), sx(n), sy(n), sz(n);
    for (size_t i = 0; i < n; ++i) {
        v[i] = idx[i].value;
        px[i] = idx[i].px;
        py[i] = idx[i].py;
        pz[i] = idx[i].pz;
        sx[i] = idx[i].sx;
        sy[i] = idx[i].sy;
        sz[i] = idx[i].sz;
    }
    Var e = tape.gather_rows(emb.value, std::move(v));
    e = tape.add(e, tape.gather_rows(emb.pos_x, std::move(px)));
    e = tape.add(e, tape.gather_rows(emb.pos_y, std::move(py)));
    e = tape.add(e, tape.gather_rows(emb.pos_z, std::move(pz)));
    e = tape.add(e, tape.gather_rows(emb.pos_x, std::move(sx)));
    e = tape.add(e, tape.gather_rows(emb.pos_y, std::move(sy)));
    e = tape.add(e, tape.gather_rows(emb.pos_z, std::move(sz)));
    return e;
}

Var position_embedding(Tape& tape, const WiredEmbeddings& emb, uint32_t idx, uint32_t idy, uint32_t idz) {
    Var px = tape.gather_rows(emb.pos_x, {int(idx)});
    Var py = tape.gather_rows(emb.pos_y, {int(idy)});
    Var pz = tape.gather_rows(emb.pos_z, {int(idz)});
    return tape.add(tape.add(px, py), pz);
}

Var class_embedding(Tape& tape, const WiredEmbeddings& emb, int label) {
    if (label < 0 || size_t(label) >= emb.cls->value.rows)
        throw_invalid("class label " + std::to_string(label) + " out of range");
    return tape.gather_rows(emb.cls, {label});
}

} // namespace octo
