#include "sol/keystore.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/rand.h>
#include <openssl/x509.h>

#include <cstring>
#include <fstream>

#include "sol/bytes.hpp"
#include "sol/codec.hpp"
#include "sol/errors.hpp"

namespace sol {

namespace detail {
void EvpPkeyDeleter::operator()(EVP_PKEY* p) const {
    EVP_PKEY_free(p);
}
}  // namespace detail

namespace {

constexpr char kStoreMagic[] = "SOLKS";
constexpr uint8_t kStoreVersion = 1;
constexpr uint8_t kKdfPbkdf2Sha256 = 1;
constexpr size_t kSaltLen = 16;
constexpr size_t kNonceLen = 12;
constexpr size_t kTagLen = 16;

struct BnDeleter {
    void operator()(BIGNUM* b) const { BN_free(b); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct BnCtxDeleter {
    void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;

struct EcGroupDeleter {
    void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};
using EcGroupPtr = std::unique_ptr<EC_GROUP, EcGroupDeleter>;

struct EcPointDeleter {
    void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
using EcPointPtr = std::unique_ptr<EC_POINT, EcPointDeleter>;

struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

struct ParamBldDeleter {
    void operator()(OSSL_PARAM_BLD* b) const { OSSL_PARAM_BLD_free(b); }
};
struct ParamDeleter {
    void operator()(OSSL_PARAM* p) const { OSSL_PARAM_free(p); }
};

[[noreturn]] void ossl_fail(const char* what) {
    ERR_clear_error();
    throw CryptoError(std::string("openssl: ") + what);
}

BnPtr bn_from_bytes(BytesView data) {
    BnPtr bn(BN_bin2bn(data.data(), static_cast<int>(data.size()), nullptr));
    if (!bn) ossl_fail("BN_bin2bn");
    return bn;
}

Bytes bn_to_padded(const BIGNUM* bn, size_t len) {
    Bytes out(len);
    if (BN_bn2binpad(bn, out.data(), static_cast<int>(len)) < 0) ossl_fail("BN_bn2binpad");
    return out;
}

Bytes spki_der(EVP_PKEY* key) {
    int len = i2d_PUBKEY(key, nullptr);
    if (len <= 0) ossl_fail("i2d_PUBKEY");
    Bytes der(static_cast<size_t>(len));
    uint8_t* p = der.data();
    if (i2d_PUBKEY(key, &p) != len) ossl_fail("i2d_PUBKEY");
    return der;
}

PublicKeyBytes public_from_pkey(Algorithm algorithm, EVP_PKEY* key) {
    return PublicKeyBytes(algorithm, spki_der(key));
}

EvpPkeyPtr pkey_from_spki(const PublicKeyBytes& key) {
    BytesView der = key.der_body();
    const uint8_t* p = der.data();
    EvpPkeyPtr pkey(d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size())));
    if (!pkey) {
        ERR_clear_error();
        return nullptr;
    }
    // The tag byte must agree with the actual key type.
    bool ok = false;
    if (key.algorithm() == Algorithm::Rsa2048)
        ok = EVP_PKEY_is_a(pkey.get(), "RSA");
    else if (key.algorithm() == Algorithm::EcdsaP256)
        ok = EVP_PKEY_is_a(pkey.get(), "EC");
    return ok ? std::move(pkey) : nullptr;
}

// ---- deterministic key generation -------------------------------------

// Draws a candidate odd 1024-bit integer with the top two bits set so the
// product of two such primes always has 2048 bits.
BnPtr draw_prime_candidate(DigestStream& stream, BN_CTX* ctx) {
    (void)ctx;
    Bytes buf = stream.take(128);
    buf[0] |= 0xc0;
    buf[127] |= 0x01;
    return bn_from_bytes(buf);
}

BnPtr find_prime(DigestStream& stream, const BIGNUM* e, BN_CTX* ctx) {
    BnPtr rem(BN_new()), pm1(BN_new());
    if (!rem || !pm1) ossl_fail("BN_new");
    for (;;) {
        BnPtr cand = draw_prime_candidate(stream, ctx);
        int is_prime = BN_check_prime(cand.get(), ctx, nullptr);
        if (is_prime < 0) ossl_fail("BN_check_prime");
        if (is_prime != 1) continue;
        // Require gcd(e, p-1) == 1 so the private exponent exists.
        if (!BN_copy(pm1.get(), cand.get()) || !BN_sub_word(pm1.get(), 1)) ossl_fail("BN_sub_word");
        if (!BN_gcd(rem.get(), pm1.get(), e, ctx)) ossl_fail("BN_gcd");
        if (!BN_is_one(rem.get())) continue;
        return cand;
    }
}

EvpPkeyPtr generate_rsa_seeded(uint64_t seed) {
    Bytes seed_bytes = to_bytes("sol-rsa-keygen-v1:");
    for (int shift = 56; shift >= 0; shift -= 8)
        seed_bytes.push_back(static_cast<uint8_t>(seed >> shift));
    DigestStream stream(seed_bytes);

    BnCtxPtr ctx(BN_CTX_new());
    if (!ctx) ossl_fail("BN_CTX_new");
    BnPtr e(BN_new());
    if (!e || !BN_set_word(e.get(), 65537)) ossl_fail("BN_set_word");

    BnPtr p = find_prime(stream, e.get(), ctx.get());
    BnPtr q;
    do {
        q = find_prime(stream, e.get(), ctx.get());
    } while (BN_cmp(p.get(), q.get()) == 0);
    // Keep p > q; the CRT coefficient below assumes it.
    if (BN_cmp(p.get(), q.get()) < 0) std::swap(p, q);

    BnPtr n(BN_new()), pm1(BN_new()), qm1(BN_new()), lambda(BN_new()), g(BN_new()),
        d(BN_new()), dp(BN_new()), dq(BN_new()), qinv(BN_new()), tmp(BN_new());
    if (!n || !pm1 || !qm1 || !lambda || !g || !d || !dp || !dq || !qinv || !tmp)
        ossl_fail("BN_new");
    if (!BN_mul(n.get(), p.get(), q.get(), ctx.get())) ossl_fail("BN_mul");
    if (!BN_copy(pm1.get(), p.get()) || !BN_sub_word(pm1.get(), 1)) ossl_fail("BN_sub_word");
    if (!BN_copy(qm1.get(), q.get()) || !BN_sub_word(qm1.get(), 1)) ossl_fail("BN_sub_word");
    // lambda = lcm(p-1, q-1) = (p-1)(q-1)/gcd(p-1, q-1)
    if (!BN_gcd(g.get(), pm1.get(), qm1.get(), ctx.get())) ossl_fail("BN_gcd");
    if (!BN_mul(tmp.get(), pm1.get(), qm1.get(), ctx.get())) ossl_fail("BN_mul");
    if (!BN_div(lambda.get(), nullptr, tmp.get(), g.get(), ctx.get())) ossl_fail("BN_div");
    if (!BN_mod_inverse(d.get(), e.get(), lambda.get(), ctx.get())) ossl_fail("BN_mod_inverse");
    if (!BN_mod(dp.get(), d.get(), pm1.get(), ctx.get())) ossl_fail("BN_mod");
    if (!BN_mod(dq.get(), d.get(), qm1.get(), ctx.get())) ossl_fail("BN_mod");
    if (!BN_mod_inverse(qinv.get(), q.get(), p.get(), ctx.get())) ossl_fail("BN_mod_inverse");

    std::unique_ptr<OSSL_PARAM_BLD, ParamBldDeleter> bld(OSSL_PARAM_BLD_new());
    if (!bld) ossl_fail("OSSL_PARAM_BLD_new");
    if (!OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_D, d.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR1, p.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR2, q.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT1, dp.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT2, dq.get()) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_COEFFICIENT1, qinv.get()))
        ossl_fail("OSSL_PARAM_BLD_push_BN");
    std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld.get()));
    if (!params) ossl_fail("OSSL_PARAM_BLD_to_param");

    PkeyCtxPtr pctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    if (!pctx || EVP_PKEY_fromdata_init(pctx.get()) != 1) ossl_fail("EVP_PKEY_fromdata_init");
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) != 1)
        ossl_fail("EVP_PKEY_fromdata(RSA)");
    return EvpPkeyPtr(raw);
}

EcGroupPtr p256_group() {
    EcGroupPtr group(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1));
    if (!group) ossl_fail("EC_GROUP_new_by_curve_name");
    return group;
}

EvpPkeyPtr ec_pkey_from_scalar(const BIGNUM* priv) {
    EcGroupPtr group = p256_group();
    BnCtxPtr ctx(BN_CTX_new());
    if (!ctx) ossl_fail("BN_CTX_new");
    EcPointPtr pub(EC_POINT_new(group.get()));
    if (!pub || EC_POINT_mul(group.get(), pub.get(), priv, nullptr, nullptr, ctx.get()) != 1)
        ossl_fail("EC_POINT_mul");
    size_t pub_len = EC_POINT_point2oct(group.get(), pub.get(), POINT_CONVERSION_UNCOMPRESSED,
                                        nullptr, 0, ctx.get());
    Bytes pub_oct(pub_len);
    if (EC_POINT_point2oct(group.get(), pub.get(), POINT_CONVERSION_UNCOMPRESSED, pub_oct.data(),
                           pub_len, ctx.get()) != pub_len)
        ossl_fail("EC_POINT_point2oct");

    std::unique_ptr<OSSL_PARAM_BLD, ParamBldDeleter> bld(OSSL_PARAM_BLD_new());
    if (!bld) ossl_fail("OSSL_PARAM_BLD_new");
    if (!OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0) ||
        !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_PRIV_KEY, priv) ||
        !OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, pub_oct.data(),
                                          pub_oct.size()))
        ossl_fail("OSSL_PARAM_BLD_push");
    std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld.get()));
    if (!params) ossl_fail("OSSL_PARAM_BLD_to_param");

    PkeyCtxPtr pctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
    if (!pctx || EVP_PKEY_fromdata_init(pctx.get()) != 1) ossl_fail("EVP_PKEY_fromdata_init");
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) != 1)
        ossl_fail("EVP_PKEY_fromdata(EC)");
    return EvpPkeyPtr(raw);
}

// Rejection-samples a scalar in [1, n-1] from the stream.
BnPtr scalar_from_stream(DigestStream& stream, const BIGNUM* order) {
    for (;;) {
        Bytes buf = stream.take(32);
        BnPtr k = bn_from_bytes(buf);
        if (BN_is_zero(k.get())) continue;
        if (BN_cmp(k.get(), order) >= 0) continue;
        return k;
    }
}

EvpPkeyPtr generate_ec_seeded(uint64_t seed) {
    Bytes seed_bytes = to_bytes("sol-ec-keygen-v1:");
    for (int shift = 56; shift >= 0; shift -= 8)
        seed_bytes.push_back(static_cast<uint8_t>(seed >> shift));
    DigestStream stream(seed_bytes);

    EcGroupPtr group = p256_group();
    const BIGNUM* order = EC_GROUP_get0_order(group.get());
    BnPtr priv = scalar_from_stream(stream, order);
    return ec_pkey_from_scalar(priv.get());
}

EvpPkeyPtr generate_native(Algorithm algorithm) {
    EVP_PKEY* raw = nullptr;
    if (algorithm == Algorithm::Rsa2048) {
        raw = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<size_t>(2048));
    } else {
        raw = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
    }
    if (!raw) ossl_fail("EVP_PKEY_Q_keygen");
    return EvpPkeyPtr(raw);
}

// ---- signing -----------------------------------------------------------

Bytes sign_rsa(EVP_PKEY* key, BytesView payload) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!md || EVP_DigestSignInit(md.get(), nullptr, EVP_sha256(), nullptr, key) != 1)
        ossl_fail("EVP_DigestSignInit");
    size_t len = 0;
    if (EVP_DigestSign(md.get(), nullptr, &len, payload.data(), payload.size()) != 1)
        ossl_fail("EVP_DigestSign(size)");
    Bytes sig(len);
    if (EVP_DigestSign(md.get(), sig.data(), &len, payload.data(), payload.size()) != 1)
        ossl_fail("EVP_DigestSign");
    sig.resize(len);
    return sig;
}

// ECDSA with a nonce derived from (private scalar, message digest), so the
// same key and payload always produce the same DER signature. Verifiable
// with any standard ECDSA implementation.
Bytes sign_ecdsa_deterministic(EVP_PKEY* key, BytesView payload) {
    Bytes digest = sha256(payload);

    BIGNUM* priv_raw = nullptr;
    if (EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_PRIV_KEY, &priv_raw) != 1)
        ossl_fail("EVP_PKEY_get_bn_param(priv)");
    BnPtr priv(priv_raw);

    EcGroupPtr group = p256_group();
    const BIGNUM* order = EC_GROUP_get0_order(group.get());
    BnCtxPtr ctx(BN_CTX_new());
    if (!ctx) ossl_fail("BN_CTX_new");

    BnPtr z = bn_from_bytes(digest);
    Bytes priv_bytes = bn_to_padded(priv.get(), 32);
    Bytes nonce_seed = to_bytes("sol-ecdsa-nonce-v1:");
    nonce_seed.insert(nonce_seed.end(), priv_bytes.begin(), priv_bytes.end());
    nonce_seed.insert(nonce_seed.end(), digest.begin(), digest.end());
    DigestStream stream(nonce_seed);

    BnPtr r(BN_new()), s(BN_new()), x(BN_new()), kinv(BN_new()), tmp(BN_new());
    if (!r || !s || !x || !kinv || !tmp) ossl_fail("BN_new");
    EcPointPtr point(EC_POINT_new(group.get()));
    if (!point) ossl_fail("EC_POINT_new");

    for (;;) {
        BnPtr k = scalar_from_stream(stream, order);
        if (EC_POINT_mul(group.get(), point.get(), k.get(), nullptr, nullptr, ctx.get()) != 1)
            ossl_fail("EC_POINT_mul");
        if (EC_POINT_get_affine_coordinates(group.get(), point.get(), x.get(), nullptr,
                                            ctx.get()) != 1)
            ossl_fail("EC_POINT_get_affine_coordinates");
        if (!BN_nnmod(r.get(), x.get(), order, ctx.get())) ossl_fail("BN_nnmod");
        if (BN_is_zero(r.get())) continue;
        if (!BN_mod_inverse(kinv.get(), k.get(), order, ctx.get())) ossl_fail("BN_mod_inverse");
        if (!BN_mod_mul(tmp.get(), r.get(), priv.get(), order, ctx.get())) ossl_fail("BN_mod_mul");
        if (!BN_mod_add(tmp.get(), tmp.get(), z.get(), order, ctx.get())) ossl_fail("BN_mod_add");
        if (!BN_mod_mul(s.get(), kinv.get(), tmp.get(), order, ctx.get())) ossl_fail("BN_mod_mul");
        if (BN_is_zero(s.get())) continue;
        break;
    }

    ECDSA_SIG* sig = ECDSA_SIG_new();
    if (!sig) ossl_fail("ECDSA_SIG_new");
    // ECDSA_SIG_set0 takes ownership of r and s.
    if (ECDSA_SIG_set0(sig, r.release(), s.release()) != 1) {
        ECDSA_SIG_free(sig);
        ossl_fail("ECDSA_SIG_set0");
    }
    int len = i2d_ECDSA_SIG(sig, nullptr);
    if (len <= 0) {
        ECDSA_SIG_free(sig);
        ossl_fail("i2d_ECDSA_SIG");
    }
    Bytes out(static_cast<size_t>(len));
    uint8_t* p = out.data();
    i2d_ECDSA_SIG(sig, &p);
    ECDSA_SIG_free(sig);
    return out;
}

// ---- sealing -----------------------------------------------------------

Bytes pbkdf2_key(const std::string& pin, BytesView salt, uint32_t iterations) {
    Bytes key(32);
    if (PKCS5_PBKDF2_HMAC(pin.data(), static_cast<int>(pin.size()), salt.data(),
                          static_cast<int>(salt.size()), static_cast<int>(iterations),
                          EVP_sha256(), static_cast<int>(key.size()), key.data()) != 1)
        ossl_fail("PKCS5_PBKDF2_HMAC");
    return key;
}

Bytes aes_gcm_seal(BytesView key, BytesView nonce, BytesView plaintext) {
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(),
                                                                        EVP_CIPHER_CTX_free);
    if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                                   nonce.data()) != 1)
        ossl_fail("EVP_EncryptInit_ex");
    Bytes out(plaintext.size() + kTagLen);
    int len = 0;
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        ossl_fail("EVP_EncryptUpdate");
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1)
        ossl_fail("EVP_EncryptFinal_ex");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen,
                            out.data() + plaintext.size()) != 1)
        ossl_fail("EVP_CTRL_GCM_GET_TAG");
    return out;
}

// Returns std::nullopt on tag mismatch (wrong PIN or tampering).
std::optional<Bytes> aes_gcm_open(BytesView key, BytesView nonce, BytesView sealed) {
    if (sealed.size() < kTagLen) return std::nullopt;
    size_t ct_len = sealed.size() - kTagLen;
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(),
                                                                        EVP_CIPHER_CTX_free);
    if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                                   nonce.data()) != 1)
        ossl_fail("EVP_DecryptInit_ex");
    Bytes out(ct_len);
    int len = 0;
    if (ct_len > 0 &&
        EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(),
                          static_cast<int>(ct_len)) != 1)
        ossl_fail("EVP_DecryptUpdate");
    Bytes tag(sealed.begin() + ct_len, sealed.end());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen, tag.data()) != 1)
        ossl_fail("EVP_CTRL_GCM_SET_TAG");
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
        ERR_clear_error();
        return std::nullopt;
    }
    return out;
}

Bytes private_key_der(EVP_PKEY* key) {
    std::unique_ptr<PKCS8_PRIV_KEY_INFO, decltype(&PKCS8_PRIV_KEY_INFO_free)> p8(
        EVP_PKEY2PKCS8(key), PKCS8_PRIV_KEY_INFO_free);
    if (!p8) ossl_fail("EVP_PKEY2PKCS8");
    int len = i2d_PKCS8_PRIV_KEY_INFO(p8.get(), nullptr);
    if (len <= 0) ossl_fail("i2d_PKCS8_PRIV_KEY_INFO");
    Bytes der(static_cast<size_t>(len));
    uint8_t* p = der.data();
    i2d_PKCS8_PRIV_KEY_INFO(p8.get(), &p);
    return der;
}

EvpPkeyPtr private_key_from_der(BytesView der) {
    const uint8_t* p = der.data();
    std::unique_ptr<PKCS8_PRIV_KEY_INFO, decltype(&PKCS8_PRIV_KEY_INFO_free)> p8(
        d2i_PKCS8_PRIV_KEY_INFO(nullptr, &p, static_cast<long>(der.size())),
        PKCS8_PRIV_KEY_INFO_free);
    if (!p8) {
        ERR_clear_error();
        return nullptr;
    }
    EvpPkeyPtr key(EVP_PKCS82PKEY(p8.get()));
    if (!key) ERR_clear_error();
    return key;
}

Bytes derive_nonce(BytesView salt, uint64_t write_counter) {
    ByteWriter w;
    w.raw(to_bytes("sol-store-nonce:"));
    w.raw(salt);
    w.u64(write_counter);
    Bytes digest = sha256(w.bytes());
    digest.resize(kNonceLen);
    return digest;
}

}  // namespace

DeviceKeyPair::DeviceKeyPair(PublicKeyBytes pub, EvpPkeyPtr priv)
    : public_key_(std::move(pub)), private_key_(std::move(priv)) {}

DeviceKeyPair generate_keypair(Algorithm algorithm, std::optional<uint64_t> seed) {
    if (algorithm != Algorithm::Rsa2048 && algorithm != Algorithm::EcdsaP256)
        throw UnsupportedAlgorithm("unsupported algorithm");
    EvpPkeyPtr key;
    if (seed.has_value()) {
        key = algorithm == Algorithm::Rsa2048 ? generate_rsa_seeded(*seed)
                                              : generate_ec_seeded(*seed);
    } else {
        key = generate_native(algorithm);
    }
    PublicKeyBytes pub = public_from_pkey(algorithm, key.get());
    return DeviceKeyPair(std::move(pub), std::move(key));
}

Bytes sign_payload(EVP_PKEY* key, BytesView payload, CryptoCounters* counters) {
    if (counters) counters->sign_ops++;
    if (EVP_PKEY_is_a(key, "EC")) return sign_ecdsa_deterministic(key, payload);
    return sign_rsa(key, payload);
}

bool verify_with_key(EVP_PKEY* key, BytesView payload, BytesView sig) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!md) return false;
    if (EVP_DigestVerifyInit(md.get(), nullptr, EVP_sha256(), nullptr, key) != 1) {
        ERR_clear_error();
        return false;
    }
    int rc = EVP_DigestVerify(md.get(), sig.data(), sig.size(), payload.data(), payload.size());
    ERR_clear_error();
    return rc == 1;
}

bool verify_payload(const PublicKeyBytes& key, BytesView payload, BytesView sig) {
    EvpPkeyPtr pkey = pkey_from_spki(key);
    if (!pkey) return false;
    return verify_with_key(pkey.get(), payload, sig);
}

bool RealVerifier::verify(const PublicKeyBytes& key, BytesView payload, BytesView sig) const {
    if (counters_) counters_->verify_ops++;
    return verify_payload(key, payload, sig);
}

SoftwareKeystore SoftwareKeystore::create(const std::filesystem::path& path,
                                          const std::string& pin, Algorithm algorithm,
                                          std::optional<uint64_t> seed, uint32_t kdf_iterations) {
    SoftwareKeystore store;
    store.path_ = path;
    store.kdf_.iterations = kdf_iterations;
    if (seed.has_value()) {
        Bytes salt_seed = to_bytes("sol-store-salt:");
        for (int shift = 56; shift >= 0; shift -= 8)
            salt_seed.push_back(static_cast<uint8_t>(*seed >> shift));
        store.kdf_.salt = DigestStream(salt_seed).take(kSaltLen);
    } else {
        store.kdf_.salt.resize(kSaltLen);
        if (RAND_bytes(store.kdf_.salt.data(), kSaltLen) != 1) ossl_fail("RAND_bytes");
    }

    DeviceKeyPair pair = generate_keypair(algorithm, seed);
    store.public_key_ = pair.public_key();
    store.private_key_ = pair.release();
    store.cached_pin_key_ = pbkdf2_key(pin, store.kdf_.salt, store.kdf_.iterations);
    store.seal_and_write();
    return store;
}

SoftwareKeystore SoftwareKeystore::open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open keystore: " + path.string());
    std::string b64((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    SoftwareKeystore store;
    store.path_ = path;
    try {
        store.record_ = base64_decode(b64);
    } catch (const MalformedEncoding& e) {
        throw StoreCorrupt(std::string("keystore is not valid base64: ") + e.what());
    }
    store.parse_record();
    return store;
}

void SoftwareKeystore::parse_record() {
    try {
        ByteReader r(record_);
        Bytes magic = r.raw(5);
        if (std::memcmp(magic.data(), kStoreMagic, 5) != 0)
            throw StoreCorrupt("bad keystore magic");
        if (r.u8() != kStoreVersion) throw StoreCorrupt("unsupported keystore version");
        uint8_t algo_tag = r.u8();
        if (r.u8() != kKdfPbkdf2Sha256) throw StoreCorrupt("unknown KDF");
        kdf_.iterations = r.u32();
        kdf_.salt = r.raw(kSaltLen);
        write_counter_ = r.u64();
        sealed_ = r.prefixed();
        Bytes pub = r.prefixed();
        if (!r.done()) throw StoreCorrupt("trailing bytes in keystore");
        public_key_ = PublicKeyBytes::from_encoded(pub);
        if (static_cast<uint8_t>(public_key_.algorithm()) != algo_tag)
            throw StoreCorrupt("algorithm tag mismatch");
    } catch (const MalformedEncoding& e) {
        throw StoreCorrupt(std::string("keystore record malformed: ") + e.what());
    }
}

void SoftwareKeystore::seal_and_write() {
    write_counter_++;
    ByteWriter plain;
    plain.prefixed(private_key_der(private_key_.get()));
    plain.u32(issued_subkeys_);
    Bytes nonce = derive_nonce(kdf_.salt, write_counter_);
    Bytes sealed = aes_gcm_seal(cached_pin_key_, nonce, plain.bytes());

    ByteWriter rec;
    rec.raw(to_bytes(kStoreMagic));
    rec.u8(kStoreVersion);
    rec.u8(static_cast<uint8_t>(public_key_.algorithm()));
    rec.u8(kKdfPbkdf2Sha256);
    rec.u32(kdf_.iterations);
    rec.raw(kdf_.salt);
    rec.u64(write_counter_);
    rec.prefixed(sealed);
    rec.prefixed(public_key_.encoded());
    record_ = rec.take();
    sealed_ = sealed;

    std::filesystem::path parent = path_.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write keystore: " + path_.string());
    out << base64_encode(record_);
    if (!out) throw IoError("short write to keystore: " + path_.string());
}

void SoftwareKeystore::lock() {
    private_key_.reset();
    cached_pin_key_.assign(cached_pin_key_.size(), 0);
    cached_pin_key_.clear();
}

void SoftwareKeystore::unlock(const std::string& pin) {
    Bytes key = pbkdf2_key(pin, kdf_.salt, kdf_.iterations);
    Bytes nonce = derive_nonce(kdf_.salt, write_counter_);
    std::optional<Bytes> plain = aes_gcm_open(key, nonce, sealed_);
    if (!plain.has_value()) throw WrongPin("PIN rejected");
    try {
        ByteReader r(*plain);
        Bytes der = r.prefixed();
        issued_subkeys_ = r.u32();
        if (!r.done()) throw StoreCorrupt("trailing bytes in sealed blob");
        private_key_ = private_key_from_der(der);
        if (!private_key_) throw StoreCorrupt("sealed private key unreadable");
    } catch (const MalformedEncoding& e) {
        private_key_.reset();
        throw StoreCorrupt(std::string("sealed blob malformed: ") + e.what());
    }
    cached_pin_key_ = key;
}

Bytes SoftwareKeystore::sign(BytesView payload) {
    if (!unlocked()) throw StoreLocked("keystore is locked");
    return sign_payload(private_key_.get(), payload, counters_);
}

Certificate SoftwareKeystore::issue_certificate(const PublicKeyBytes& subject, uint64_t now) {
    if (!unlocked()) throw StoreLocked("keystore is locked");
    return make_certificate(*this, subject, now);
}

SubKeyCertificate SoftwareKeystore::register_subkey(const PublicKeyBytes& subkey_public,
                                                    std::string app_tag, uint64_t now,
                                                    uint32_t maxsubkeys) {
    if (!unlocked()) throw StoreLocked("keystore is locked");
    if (issued_subkeys_ >= maxsubkeys)
        throw SubkeyLimitReached("sub-key limit reached (" + std::to_string(maxsubkeys) + ")");
    SubKeyCertificate skc = make_subkey_certificate(*this, subkey_public, std::move(app_tag), now);
    issued_subkeys_++;
    seal_and_write();
    return skc;
}

}  // namespace sol
