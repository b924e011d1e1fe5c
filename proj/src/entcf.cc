// Copyright 2026 The cczst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cczst/entcf.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <sstream>

namespace cczst::entcf {

namespace {

constexpr uint64_t kTagPerm = 0x7065726d;   // "perm"
constexpr uint64_t kTagShift = 0x7368696674;  // "shift"
constexpr uint64_t kTagId = 0x6b65796964;   // "keyid"

void check_width(int w) {
    if (w < kMinWidth || w > kMaxWidth) {
        throw ParameterError("preimage width w=" + std::to_string(w) + " outside [" + std::to_string(kMinWidth) +
                             ", " + std::to_string(kMaxWidth) + "]");
    }
}

// Unbiased bounded draw from 32 random bits (Lemire).
inline uint32_t bounded32(uint32_t random, uint32_t bound, CounterRng &rng) {
    uint64_t m = static_cast<uint64_t>(random) * bound;
    auto low = static_cast<uint32_t>(m);
    if (low < bound) {
        uint32_t threshold = (0u - bound) % bound;
        while (low < threshold) {
            m = static_cast<uint64_t>(static_cast<uint32_t>(rng())) * bound;
            low = static_cast<uint32_t>(m);
        }
    }
    return static_cast<uint32_t>(m >> 32);
}

}  // namespace

char family_char(Family f) { return f == Family::F ? 'F' : 'G'; }

Family parse_family(std::string_view text) {
    if (text == "F") return Family::F;
    if (text == "G") return Family::G;
    throw std::invalid_argument("unknown function family '" + std::string(text) + "'");
}

SecurityParam::SecurityParam(int lambda) : lambda_(lambda) { check_width(lambda); }

Permutation::Permutation(int bits, uint64_t seed)
    : bits_(bits), size_(size_t{1} << bits), table_(new Word[size_t{1} << bits]) {
    std::iota(table_.get(), table_.get() + size_, Word{0});
    CounterRng rng(seed);
    // Fisher-Yates, two 32-bit draws per generator output. The table size is
    // a power of two, so i stays odd at the top of every iteration.
    for (auto i = static_cast<uint32_t>(size_ - 1); i >= 1; i -= 2) {
        uint64_t r = rng();
        uint32_t j = bounded32(static_cast<uint32_t>(r >> 32), i + 1, rng);
        std::swap(table_[i], table_[j]);
        uint32_t j2 = bounded32(static_cast<uint32_t>(r), i, rng);
        std::swap(table_[i - 1], table_[j2]);
        if (i == 1) break;
    }
}

Word Permutation::inverse(Word v) const {
    if (!inverse_ready_.load(std::memory_order_acquire)) {
        if (scans_.fetch_add(1, std::memory_order_relaxed) < kLinearScans) {
            return static_cast<Word>(std::find(table_.get(), table_.get() + size_, v) - table_.get());
        }
        std::call_once(inverse_once_, [this] {
            inverse_.reset(new Word[size_]);
            for (Word i = 0; i < size_; i++) inverse_[table_[i]] = i;
            inverse_ready_.store(true, std::memory_order_release);
        });
    }
    return inverse_[v];
}

KeyRecord export_key(const Trapdoor &t) {
    return KeyRecord{t.key.id, t.key.w, t.family, t.perm_seed, t.family == Family::F ? t.shift : 0};
}

std::string to_text(const KeyRecord &r) {
    std::ostringstream out;
    out << "id=" << r.id << " w=" << r.w << " family=" << family_char(r.family) << " perm_seed=" << r.perm_seed
        << " shift=" << (r.family == Family::F ? format_bits(r.shift, r.w) : std::string("-"));
    return out.str();
}

KeyRecord parse_key_record(std::string_view text) {
    std::map<std::string, std::string, std::less<>> fields;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("key record token '" + token + "' is not key=value");
        }
        fields[token.substr(0, eq)] = token.substr(eq + 1);
    }
    auto need = [&](const char *name) -> const std::string & {
        auto it = fields.find(name);
        if (it == fields.end()) {
            throw std::invalid_argument(std::string("key record missing field '") + name + "'");
        }
        return it->second;
    };
    auto to_u64 = [](const std::string &s) {
        uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            throw std::invalid_argument("bad integer '" + s + "' in key record");
        }
        return v;
    };
    KeyRecord r;
    r.id = to_u64(need("id"));
    r.w = static_cast<int>(to_u64(need("w")));
    check_width(r.w);
    r.family = parse_family(need("family"));
    r.perm_seed = to_u64(need("perm_seed"));
    const std::string &shift = need("shift");
    if (r.family == Family::F) {
        r.shift = parse_bits(shift, r.w);
        if (r.shift == 0) throw std::invalid_argument("F key record with zero shift");
    } else if (shift != "-") {
        throw std::invalid_argument("G key record must have shift=-");
    }
    return r;
}

Trapdoor Oracle::insert(uint64_t id, int w, Family family, uint64_t perm_seed, Word shift) {
    auto perm = std::make_shared<const Permutation>(w + 1, perm_seed);
    auto record = std::make_shared<const Record>(Record{w, family, shift, perm});
    std::unique_lock lock(mu_);
    auto [it, inserted] = records_.emplace(id, record);
    if (!inserted) {
        const Record &old = *it->second;
        if (old.w != w || old.family != family || old.shift != shift) {
            throw std::invalid_argument("key id " + std::to_string(id) + " already registered with different material");
        }
    }
    return Trapdoor{KeyHandle{id, w}, family, perm_seed, shift, it->second->perm};
}

std::pair<KeyHandle, Trapdoor> Oracle::gen(Family family, SecurityParam sp, uint64_t seed) {
    const int w = sp.w();
    uint64_t perm_seed = derive_seed(seed, kTagPerm);
    Word shift = 0;
    if (family == Family::F) {
        CounterRng rng(derive_seed(seed, kTagShift));
        shift = static_cast<Word>(1 + rng.below((uint64_t{1} << w) - 1));
    }
    uint64_t id;
    {
        std::shared_lock lock(mu_);
        uint64_t salt = records_.size();
        do {
            id = derive_seed(seed, kTagId + salt++);
        } while (records_.count(id) != 0);
    }
    Trapdoor t = insert(id, w, family, perm_seed, shift);
    return {t.key, t};
}

Trapdoor Oracle::restore(const KeyRecord &r) {
    check_width(r.w);
    if (r.family == Family::F && r.shift == 0) {
        throw ParameterError("F key needs a nonzero shift");
    }
    return insert(r.id, r.w, r.family, r.perm_seed, r.family == Family::F ? r.shift : 0);
}

std::shared_ptr<const Oracle::Record> Oracle::lookup(KeyHandle k) const {
    std::shared_lock lock(mu_);
    auto it = records_.find(k.id);
    if (it == records_.end() || it->second->w != k.w) {
        throw UnknownKeyError("unknown key handle " + std::to_string(k.id));
    }
    return it->second;
}

size_t Oracle::size() const {
    std::shared_lock lock(mu_);
    return records_.size();
}

namespace {

Word evaluate(const Permutation &perm, int w, Family family, Word shift, int b, Word x) {
    if ((b != 0 && b != 1) || (x >> w) != 0) {
        throw ParameterError("eval argument out of range");
    }
    if (family == Family::G) {
        return perm.forward((static_cast<Word>(b) << w) | x);
    }
    return perm.forward(b ? x ^ shift : x);
}

bool check(const Permutation &perm, int w, Family family, Word shift, int b, Word x, Word y) {
    if ((b != 0 && b != 1) || (x >> w) != 0 || (y >> (w + 1)) != 0) {
        return false;
    }
    return evaluate(perm, w, family, shift, b, x) == y;
}

}  // namespace

Word Oracle::eval(KeyHandle k, int b, Word x) const {
    auto rec = lookup(k);
    return evaluate(*rec->perm, rec->w, rec->family, rec->shift, b, x);
}

bool Oracle::chk(KeyHandle k, int b, Word x, Word y) const {
    auto rec = lookup(k);
    return check(*rec->perm, rec->w, rec->family, rec->shift, b, x, y);
}

Word eval(const Trapdoor &t, int b, Word x) { return evaluate(*t.perm, t.key.w, t.family, t.shift, b, x); }

bool chk(const Trapdoor &t, int b, Word x, Word y) { return check(*t.perm, t.key.w, t.family, t.shift, b, x, y); }

std::pair<Word, Commitment> Oracle::sample_commitment(KeyHandle k, CounterRng &rng) const {
    auto rec = lookup(k);
    const uint64_t domain = uint64_t{1} << rec->w;
    if (rec->family == Family::G) {
        int b = rng.bit();
        auto x = static_cast<Word>(rng.below(domain));
        Word y = rec->perm->forward((static_cast<Word>(b) << rec->w) | x);
        return {y, Definite{b, x, rec->w}};
    }
    auto x0 = static_cast<Word>(rng.below(domain));
    Word y = rec->perm->forward(x0);
    return {y, Claw{x0, x0 ^ rec->shift, rec->w}};
}

std::optional<Preimage> invert(const Trapdoor &t, int b, Word y) {
    const int w = t.key.w;
    if ((y >> (w + 1)) != 0 || (b != 0 && b != 1)) return std::nullopt;
    Word z = t.perm->inverse(y);
    Word low = z & ((Word{1} << w) - 1);
    int top = static_cast<int>(z >> w);
    if (t.family == Family::G) {
        return Preimage{top, low};
    }
    if (top != 0) return std::nullopt;
    return Preimage{b, b ? low ^ t.shift : low};
}

std::optional<ClawPair> claw(const Trapdoor &t, Word y) {
    if (t.family != Family::F) throw MisuseError("claw() needs an F-family trapdoor");
    auto p0 = invert(t, 0, y);
    if (!p0) return std::nullopt;
    return ClawPair{p0->x, p0->x ^ t.shift, y};
}

std::optional<int> decode_b(const Trapdoor &t, Word y) {
    if (t.family != Family::G) throw MisuseError("decode_b needs a G-family trapdoor");
    auto p = invert(t, 0, y);
    if (!p) return std::nullopt;
    return p->b;
}

std::optional<int> decode_u(const Trapdoor &t, Word y, Word d) {
    if (t.family != Family::F) throw MisuseError("decode_u needs an F-family trapdoor");
    if ((d >> t.key.w) != 0) return std::nullopt;
    auto pair = claw(t, y);
    if (!pair) return std::nullopt;
    return dot(d, pair->x0 ^ pair->x1);
}

Opening hadamard_open(const Commitment &c, CounterRng &rng) {
    return std::visit(
        [&rng](const auto &state) -> Opening {
            using T = std::decay_t<decltype(state)>;
            auto d = static_cast<Word>(rng.below(uint64_t{1} << state.w));
            if constexpr (std::is_same_v<T, Definite>) {
                return Opening{d, CollapsedQubit{CollapsedQubit::Basis::Z, state.b}};
            } else {
                return Opening{d, CollapsedQubit{CollapsedQubit::Basis::X, dot(d, state.x0 ^ state.x1)}};
            }
        },
        c);
}

}  // namespace cczst::entcf
