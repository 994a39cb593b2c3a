#!/usr/bin/env python3
"""Generates the bundled irreducible-representation data files.

Element order matches the library's permutation-group builder: lexicographic
permutations of [n], filtered to even ones for alternating groups.
Construction:
  * trivial and sign characters directly;
  * (n-1)-dim standard representation as the sum-zero block of the
    permutation representation (real orthogonal);
  * A5 extras: the 5-dim piece projected out of 4x4 with its integer
    character, and the two 3-dim pieces obtained by splitting the wedge
    square of the standard rep with a random equivariant operator.

Run from the repository root:  python3 scripts/gen_irreps.py
"""

import itertools
import numpy as np

TOL = 1e-10


def perms(n, even_only):
    out = []
    for p in itertools.permutations(range(n)):
        if even_only:
            inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
            if inv % 2:
                continue
        out.append(p)
    return out


def perm_matrix(p):
    n = len(p)
    m = np.zeros((n, n))
    for j in range(n):
        m[p[j], j] = 1.0  # P e_j = e_{p(j)}, so P(a)P(b) = P(a∘b) with (a∘b)(i)=a(b(i))
    return m


def standard_rep(els, n):
    # orthonormal basis of the sum-zero subspace
    basis = np.linalg.svd(np.eye(n) - np.ones((n, n)) / n)[0][:, : n - 1]
    return [basis.T @ perm_matrix(p) @ basis for p in els]


def check_rep(els, mats, compose_index):
    d = len(els)
    dim = mats[0].shape[0]
    for g in range(d):
        assert np.allclose(mats[g] @ mats[g].T, np.eye(dim), atol=TOL), "not orthogonal"
    for a in range(0, d, 7):
        for b in range(d):
            ab = compose_index(a, b)
            assert np.allclose(mats[a] @ mats[b], mats[ab], atol=TOL), "homomorphism fails"
    chi2 = sum(np.trace(m) ** 2 for m in mats)
    assert abs(chi2 - d) < 1e-6, f"reducible: sum chi^2 = {chi2}"


def cycle_type(p):
    n = len(p)
    seen = [False] * n
    lens = []
    for i in range(n):
        if seen[i]:
            continue
        c, j = 0, i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            c += 1
        lens.append(c)
    return tuple(sorted(lens, reverse=True))


def project(mats, char_values, dim_target):
    d = len(mats)
    n = mats[0].shape[0]
    proj = np.zeros((n, n))
    for g in range(d):
        proj += char_values[g] * mats[g]
    proj *= dim_target / d
    w, v = np.linalg.eigh(proj)
    cols = v[:, w > 0.5]
    assert cols.shape[1] == dim_target, f"projector rank {cols.shape[1]} != {dim_target}"
    q, _ = np.linalg.qr(cols)
    return [q.T @ m @ q for m in mats]


def split_pair(mats, seed=7):
    # random symmetric equivariant operator; its eigenspaces are the two irreps
    n = mats[0].shape[0]
    rng = np.random.default_rng(seed)
    m0 = rng.standard_normal((n, n))
    m0 = m0 + m0.T
    t = sum(m @ m0 @ m.T for m in mats) / len(mats)
    w, v = np.linalg.eigh(t)
    # eigenvalues cluster into two groups of three
    order = np.argsort(w)
    blocks = [v[:, order[:3]], v[:, order[3:]]]
    out = []
    for b in blocks:
        q, _ = np.linalg.qr(b)
        out.append([q.T @ m @ q for m in mats])
    return out


def wedge_rep(mats4):
    # basis (e_i ⊗ e_j - e_j ⊗ e_i)/sqrt(2), i < j
    pairs = [(i, j) for i in range(4) for j in range(4) if i < j]
    emb = np.zeros((16, 6))
    for c, (i, j) in enumerate(pairs):
        emb[i * 4 + j, c] = 1 / np.sqrt(2)
        emb[j * 4 + i, c] = -1 / np.sqrt(2)
    return [emb.T @ np.kron(m, m) @ emb for m in mats4]


def write_file(path, name, els, irreps):
    d = len(els)
    with open(path, "w") as f:
        f.write(f"group_name {name}\n")
        f.write(f"order {d}\n")
        f.write(f"irrep_count {len(irreps)}\n")
        for mats in irreps:
            dim = mats[0].shape[0]
            f.write("irrep\ndimension %d\n" % dim)
            for g in range(d):
                entries = []
                for i in range(dim):
                    for j in range(dim):
                        entries.append("%.17g 0" % mats[g][i, j])
                f.write(f"matrix {g} " + " ".join(entries) + "\n")
    print(f"wrote {path}: dims {[m[0].shape[0] for m in irreps]}")


def sign_char(p):
    inv = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return -1.0 if inv % 2 else 1.0


def main():
    # ---- S3 ----
    els = perms(3, even_only=False)
    index = {p: i for i, p in enumerate(els)}
    compose = lambda a, b: index[tuple(els[a][els[b][i]] for i in range(3))]
    triv = [np.eye(1) for _ in els]
    sign = [np.eye(1) * sign_char(p) for p in els]
    std = standard_rep(els, 3)
    for rep in (triv, sign, std):
        check_rep(els, rep, compose)
    write_file("data/irreps_s3.txt", "S3", els, [triv, sign, std])

    # ---- A5 ----
    els = perms(5, even_only=True)
    index = {p: i for i, p in enumerate(els)}
    compose = lambda a, b: index[tuple(els[a][els[b][i]] for i in range(5))]
    triv = [np.eye(1) for _ in els]
    std4 = standard_rep(els, 5)
    # 5-dim: project chi5 = (5, 1, -1, 0, 0) out of std4 ⊗ std4
    chi5 = {(1, 1, 1, 1, 1): 5.0, (2, 2, 1): 1.0, (3, 1, 1): -1.0, (5,): 0.0}
    kron = [np.kron(m, m) for m in std4]
    rep5 = project(kron, [chi5[cycle_type(p)] for p in els], 5)
    # two 3-dim pieces from the wedge square (character sum (6, -2, 0, 1, 1))
    rep3a, rep3b = split_pair(wedge_rep(std4))
    irreps = [triv, std4, rep5, rep3a, rep3b]
    for rep in irreps:
        check_rep(els, rep, compose)
    dims = sorted(m[0].shape[0] for m in irreps)
    assert dims == [1, 3, 3, 4, 5]
    assert sum(x * x for x in dims) == 60
    # golden-ratio characters on the 3-dim pieces as a final sanity check
    phi = (1 + np.sqrt(5)) / 2
    five_cycles = [i for i, p in enumerate(els) if cycle_type(p) == (5,)]
    vals = sorted({round(float(np.trace(rep3a[g])), 6) for g in five_cycles})
    assert vals == sorted([round(phi, 6), round(1 - phi, 6)]), vals
    write_file("data/irreps_a5.txt", "A5", els, irreps)


if __name__ == "__main__":
    main()
