#!/usr/bin/env python3
"""Independent scalar/numpy oracle for the cloakvit golden vectors.

Written from the formulas alone (no code shared with the C++ library). Running
it regenerates tests/fixtures/golden_vectors.hpp.
"""
import math
import sys
from pathlib import Path

import numpy as np

MASK = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_next(state):
    state = (state + GOLDEN_GAMMA) & MASK
    z = state
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return state, z


def gen_permutation(seed, n):
    a = list(range(n))
    state = seed
    for i in range(n - 1, 0, -1):
        bound = i + 1
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            state, r = splitmix64_next(state)
            if r < limit:
                break
        j = r % bound
        a[i], a[j] = a[j], a[i]
    return a


def seeds(key):
    return int.from_bytes(key[0:8], "little"), int.from_bytes(key[8:16], "little")


def fixture_image(h, w, c, salt=0):
    """Smooth synthetic 'natural' image, pure integer arithmetic."""
    img = np.zeros((h, w, c), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            for ch in range(c):
                v = 40 + (3 * x + 2 * y) + ((x - w // 2) * (y - h // 2)) // 8 + 50 * ch + 17 * salt
                v += ((x * 7 + y * 13 + ch * 5 + salt) % 11)
                img[y, x, ch] = v & 0xFF
    return img


def extract(img, m):
    h, w, c = img.shape
    out = []
    for by in range(h // m):
        for bx in range(w // m):
            out.append(img[by * m:(by + 1) * m, bx * m:(bx + 1) * m, :].reshape(-1).copy())
    return np.stack(out)


def assemble(patches, h, w, c, m):
    img = np.zeros((h, w, c), dtype=patches.dtype)
    cols = w // m
    for idx, p in enumerate(patches):
        by, bx = divmod(idx, cols)
        img[by * m:(by + 1) * m, bx * m:(bx + 1) * m, :] = p.reshape(m, m, c)
    return img


def pixel_perm(key, m, c, per_channel):
    ps, _ = seeds(key)
    if per_channel:
        small = gen_permutation(ps, m * m)
        return [small[d // c] * c + d % c for d in range(m * m * c)]
    return gen_permutation(ps, m * m * c)


def encrypt_vit(img, key, m, per_channel=False):
    h, w, c = img.shape
    p = extract(img, m)
    pix = pixel_perm(key, m, c, per_channel)
    _, bs = seeds(key)
    blk = gen_permutation(bs, p.shape[0])
    enc = np.zeros_like(p)
    for i in range(p.shape[0]):
        for d in range(p.shape[1]):
            enc[i, d] = p[blk[i], pix[d]]
    return assemble(enc, h, w, c, m)


CHANNEL_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


def encrypt_pixel_based(img, key):
    h, w, c = img.shape
    state = int.from_bytes(key[16:24], "little")
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            state, r = splitmix64_next(state)
            flags = r & 7
            perm = CHANNEL_PERMS[(r >> 8) % 6]
            px = [int(img[y, x, ch]) for ch in range(3)]
            px = [255 - v if (flags >> ch) & 1 else v for ch, v in enumerate(px)]
            for ch in range(3):
                out[y, x, ch] = px[perm[ch]]
    return out


# ---- ViT -----------------------------------------------------------------

def tensor_table(cfg):
    E, D, N = cfg["embed_dim"], cfg["patch"] ** 2 * 3, (cfg["image"] // cfg["patch"]) ** 2
    H = E * cfg["mlp_ratio"]
    t = [("patch_embed.weight", (D, E)), ("patch_embed.bias", (E,)),
         ("cls_token", (E,)), ("pos_embed", (N + 1, E))]
    for l in range(cfg["depth"]):
        b = f"blocks.{l}."
        t += [(b + "ln1.weight", (E,)), (b + "ln1.bias", (E,))]
        for n in ("q", "k", "v", "proj"):
            t += [(b + f"attn.{n}.weight", (E, E)), (b + f"attn.{n}.bias", (E,))]
        t += [(b + "ln2.weight", (E,)), (b + "ln2.bias", (E,)),
              (b + "mlp.fc1.weight", (E, H)), (b + "mlp.fc1.bias", (H,)),
              (b + "mlp.fc2.weight", (H, E)), (b + "mlp.fc2.bias", (E,))]
    t += [("norm.weight", (E,)), ("norm.bias", (E,)),
          ("head.weight", (cfg["classes"], E)), ("head.bias", (cfg["classes"],))]
    return t


def is_ln(name):
    return name.startswith("norm.") or ".ln1." in name or ".ln2." in name


def random_init(cfg, seed):
    state = seed
    w = {}
    for name, shape in tensor_table(cfg):
        n = int(np.prod(shape))
        if is_ln(name):
            w[name] = np.full(shape, 1.0 if name.endswith("weight") else 0.0, dtype=np.float32)
            continue
        vals = np.empty(n, dtype=np.float32)
        for k in range(n):
            state, r = splitmix64_next(state)
            u = (r >> 11) * (2.0 ** -53)
            vals[k] = np.float32(-0.02 + 0.04 * u)
        w[name] = vals.reshape(shape)
    return w


def f32(x):
    return np.asarray(x, dtype=np.float64).astype(np.float32)


def layer_norm(x, g, b):
    x = x.astype(np.float64)
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    return f32((x - mu) / np.sqrt(var + 1e-6) * g.astype(np.float64) + b.astype(np.float64))


def linear(x, w_in_out, b):
    return f32(x.astype(np.float64) @ w_in_out.astype(np.float64) + b.astype(np.float64))


def gelu(x):
    erf = np.vectorize(math.erf)
    x = x.astype(np.float64)
    return f32(0.5 * x * (1.0 + erf(x / math.sqrt(2.0))))


def forward(w, cfg, img):
    P, E, heads = cfg["patch"], cfg["embed_dim"], cfg["heads"]
    x = f32((img.astype(np.float64) / 255.0 - 0.5) / 0.5)
    patches = extract(x, P)
    emb = linear(patches, w["patch_embed.weight"], w["patch_embed.bias"])
    tok = np.concatenate([w["cls_token"][None, :], emb], axis=0)
    tok = f32(tok.astype(np.float64) + w["pos_embed"].astype(np.float64))
    hd = E // heads
    for l in range(cfg["depth"]):
        b = f"blocks.{l}."
        h = layer_norm(tok, w[b + "ln1.weight"], w[b + "ln1.bias"])
        q = linear(h, w[b + "attn.q.weight"], w[b + "attn.q.bias"])
        k = linear(h, w[b + "attn.k.weight"], w[b + "attn.k.bias"])
        v = linear(h, w[b + "attn.v.weight"], w[b + "attn.v.bias"])
        att = np.zeros_like(q)
        for hh in range(heads):
            sl = slice(hh * hd, (hh + 1) * hd)
            s = q[:, sl].astype(np.float64) @ k[:, sl].astype(np.float64).T / math.sqrt(hd)
            s = np.exp(s - s.max(axis=1, keepdims=True))
            p = s / s.sum(axis=1, keepdims=True)
            att[:, sl] = f32(p @ v[:, sl].astype(np.float64))
        tok = f32(tok.astype(np.float64) + linear(att, w[b + "attn.proj.weight"], w[b + "attn.proj.bias"]))
        h = layer_norm(tok, w[b + "ln2.weight"], w[b + "ln2.bias"])
        m = gelu(linear(h, w[b + "mlp.fc1.weight"], w[b + "mlp.fc1.bias"]))
        tok = f32(tok.astype(np.float64) + linear(m, w[b + "mlp.fc2.weight"], w[b + "mlp.fc2.bias"]))
    cls = layer_norm(tok[0:1], w["norm.weight"], w["norm.bias"])[0]
    return f32(w["head.weight"].astype(np.float64) @ cls.astype(np.float64) + w["head.bias"].astype(np.float64))


TOY = dict(image=64, patch=16, embed_dim=64, depth=2, heads=4, mlp_ratio=4, classes=4)


def cpp_array(name, ctype, values, per_line=16):
    vals = list(values)
    lines = []
    for i in range(0, len(vals), per_line):
        lines.append("    " + ", ".join(str(v) for v in vals[i:i + per_line]) + ",")
    return f"inline constexpr {ctype} {name}[{len(vals)}] = {{\n" + "\n".join(lines) + "\n};\n"


def main():
    zero_key = bytes(32)
    _, sm0 = splitmix64_next(0)
    perm4 = gen_permutation(0, 4)
    ps, _ = seeds(zero_key)
    perm768 = gen_permutation(ps, 768)
    img32 = fixture_image(32, 32, 3)
    enc32 = encrypt_vit(img32, zero_key, 16)
    enc32_pc = encrypt_vit(img32, zero_key, 16, per_channel=True)
    pix32 = encrypt_pixel_based(img32, zero_key)
    model = random_init(TOY, 7)
    img64 = fixture_image(64, 64, 3)
    logits = forward(model, TOY, img64)
    lg = math.lgamma
    ks = (lg(769) + lg(197)) / math.log(2)
    try:
        import mpmath
        mpmath.mp.dps = 40
        ks_exact = float((mpmath.log(mpmath.factorial(768)) + mpmath.log(mpmath.factorial(196))) / mpmath.log(2))
    except ImportError:
        ks_exact = ks

    out = ["// Generated by tests/oracle/golden_oracle.py. Do not edit by hand.",
           "#pragma once", "", "#include <cstdint>", "", "namespace golden {", ""]
    out.append(f"inline constexpr std::uint64_t kSplitMix64Seed0Output = 0x{sm0:016X}ULL;\n")
    out.append(cpp_array("kPermN4Seed0", "std::uint32_t", perm4))
    out.append(cpp_array("kPermN768ZeroKeyPixel", "std::uint32_t", perm768))
    out.append(cpp_array("kEncrypted32MixedZeroKey", "std::uint8_t", enc32.reshape(-1)))
    out.append(cpp_array("kEncrypted32PerChannelZeroKey", "std::uint8_t", enc32_pc.reshape(-1)))
    out.append(cpp_array("kPixelBased32ZeroKey", "std::uint8_t", pix32.reshape(-1)))
    out.append(cpp_array("kToyLogitsSeed7", "double", [repr(float(v)) for v in logits]))
    out.append(f"inline constexpr double kKeyspaceBitsVitS16 = {ks_exact!r};\n")
    out.append("}  // namespace golden\n")
    dest = Path(__file__).resolve().parent.parent / "fixtures" / "golden_vectors.hpp"
    dest.write_text("\n".join(out))
    print("splitmix64(0) =", hex(sm0))
    print("perm4 =", perm4)
    print("toy logits =", logits)
    print("keyspace =", ks_exact, "lgamma", ks)


if __name__ == "__main__":
    main()
