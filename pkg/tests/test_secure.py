import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from detcodes.code import parity_holds, parity_partners, system
from detcodes.secure import (
    KeyStream,
    Role,
    Scheme,
    SecureParams,
    assemble,
    build_layout,
    extract_keys,
    extract_secrets,
    key_count,
    sample_keys,
    secret_capacity,
)
from detcodes.subsets import binom


def layout_for(n, d, m, ell, scheme, q=None):
    return build_layout(SecureParams(system(n, d, m, q), ell, scheme))


def test_capacity_examples_d6_m2_ell2():
    assert secret_capacity(6, 2, 2, Scheme.TYPE_I) == 40
    assert key_count(6, 2, 2, Scheme.TYPE_I) == 30
    assert secret_capacity(6, 2, 2, Scheme.TYPE_II) == 20
    assert key_count(6, 2, 2, Scheme.TYPE_II) == 50
    assert secret_capacity(6, 0, 2, Scheme.PLAIN) == 70


@pytest.mark.filterwarnings("ignore:Type-II with m=")
def test_layout_counts_match_formulas():
    for d in range(1, 8):
        for m in range(1, d + 1):
            for scheme in (Scheme.TYPE_I, Scheme.TYPE_II):
                top = d if scheme is Scheme.TYPE_II else d - 1
                for ell in range(0, top + 1):
                    lay = layout_for(d + 2, d, m, ell, scheme)
                    assert lay.secret_count == secret_capacity(d, ell, m, scheme)
                    assert lay.key_count == key_count(d, ell, m, scheme)
                    f = m * binom(d + 1, m + 1)
                    assert lay.secret_count + lay.key_count == f


def test_count_identity_closed_form_d10():
    # F_s + |Q| = F holds for every (d, m, ell) purely by the formulas
    for d in range(1, 11):
        for m in range(1, d + 1):
            f = m * binom(d + 1, m + 1)
            for scheme in (Scheme.TYPE_I, Scheme.TYPE_II):
                for ell in range(0, d + 1):
                    total = secret_capacity(d, ell, m, scheme) + key_count(
                        d, ell, m, scheme
                    )
                    assert total == f


def test_type_i_top_row_key_count_identity():
    # keys fill exactly ell*alpha - C(ell, m+1) cells in the top ell rows
    for d in range(2, 8):
        for m in range(1, d + 1):
            for ell in range(1, d):
                lay = layout_for(d + 2, d, m, ell, Scheme.TYPE_I)
                assert all(x <= ell for x, _ in lay.key_cells)
                assert lay.key_count == ell * binom(d, m) - binom(ell, m + 1)


def test_type_ii_blocks():
    lay = layout_for(8, 6, 2, 2, Scheme.TYPE_II)
    for x, I in lay.secret_cells:
        assert x > 2 and all(y > 2 for y in I)
    for x, I in lay.key_cells:
        assert x <= 2 or any(y <= 2 for y in I)


@pytest.mark.filterwarnings("ignore:Type-II with m=")
def test_type_ii_remark4_parities_inside_d_touch_only_secrets():
    for d in range(2, 8):
        for m in range(1, d):
            for ell in range(1, d):
                lay = layout_for(d + 2, d, m, ell, Scheme.TYPE_II)
                for J in lay.sparams.base.parity_groups.subsets():
                    x, I = J[-1], J[:-1]
                    in_d = x > ell and all(y > ell for y in I)
                    if in_d:
                        for _, y, Y in parity_partners(x, I):
                            assert lay.role_of(y, Y) is Role.SECRET
                            assert y > ell and all(v > ell for v in Y)


@pytest.mark.filterwarnings("ignore:Type-II with m=")
def test_scheme_validation():
    ps = system(8, 6, 2)
    with pytest.raises(ValueError):
        SecureParams(ps, 1, Scheme.PLAIN)
    with pytest.raises(ValueError):
        SecureParams(ps, 6, Scheme.TYPE_I)  # ell < d required
    with pytest.raises(ValueError):
        SecureParams(ps, 7, Scheme.TYPE_II)
    SecureParams(ps, 6, Scheme.TYPE_II)  # ell = d allowed


def test_type_ii_zero_capacity_warns():
    ps = system(8, 6, 5)
    with pytest.warns(UserWarning):
        sp = SecureParams(ps, 3, Scheme.TYPE_II)  # m=5 > d-ell=3
    assert sp.secret_count == 0
    assert sp.key_count == ps.file_size


def test_ell_zero_degenerates_to_plain():
    for scheme in (Scheme.TYPE_I, Scheme.TYPE_II):
        lay = layout_for(8, 6, 2, 0, scheme)
        assert lay.key_count == 0
        assert lay.secret_count == 70


def test_assemble_extract_roundtrip():
    rng = np.random.default_rng(5)
    for scheme, ell in ((Scheme.TYPE_I, 2), (Scheme.TYPE_II, 2), (Scheme.PLAIN, 0)):
        lay = layout_for(8, 6, 2, ell, scheme)
        s = rng.integers(0, 11, lay.secret_count)
        k = rng.integers(0, 11, lay.key_count)
        M = assemble(lay, s, k)
        assert parity_holds(M, lay.sparams.base)
        assert np.array_equal(extract_secrets(M, lay), s)
        assert np.array_equal(extract_keys(M, lay), k)


def test_assemble_zero_inputs_and_count_errors():
    lay = layout_for(8, 6, 2, 2, Scheme.TYPE_I)
    z = assemble(lay, np.zeros(40, dtype=int), np.zeros(30, dtype=int))
    assert not z.a.any()
    with pytest.raises(ValueError):
        assemble(lay, np.zeros(39, dtype=int), np.zeros(30, dtype=int))
    with pytest.raises(ValueError):
        assemble(lay, np.zeros(40, dtype=int), np.zeros(29, dtype=int))


def test_type_i_parity_mixes_key_and_secret_like_worked_example():
    # group {1,3,4}: M(4,{1,3}) = -(key at (1,{3,4})) + (secret at (3,{1,4}))
    lay = layout_for(8, 6, 2, 2, Scheme.TYPE_I)
    assert lay.role_of(1, (3, 4)) is Role.KEY
    assert lay.role_of(3, (1, 4)) is Role.SECRET
    rng = np.random.default_rng(9)
    s = rng.integers(0, 11, 40)
    k = rng.integers(0, 11, 30)
    M = assemble(lay, s, k)
    cols = lay.sparams.base.columns
    key_val = int(M.a[0, cols.rank((3, 4))])
    sec_val = int(M.a[2, cols.rank((1, 4))])
    assert int(M.a[3, cols.rank((1, 3))]) == (-key_val + sec_val) % 11


def test_type_ii_parity_in_c_block_mixes_keys_like_worked_example():
    # group {2,5,6}: M(6,{2,5}) = -(key at (2,{5,6})) + (key at (5,{2,6}))
    lay = layout_for(8, 6, 2, 2, Scheme.TYPE_II)
    assert lay.role_of(2, (5, 6)) is Role.KEY
    assert lay.role_of(5, (2, 6)) is Role.KEY
    rng = np.random.default_rng(10)
    s = rng.integers(0, 11, 20)
    k = rng.integers(0, 11, 50)
    M = assemble(lay, s, k)
    cols = lay.sparams.base.columns
    v1 = int(M.a[1, cols.rank((5, 6))])
    v2 = int(M.a[4, cols.rank((2, 6))])
    assert int(M.a[5, cols.rank((2, 5))]) == (-v1 + v2) % 11


def test_node_share_column_structure_type_i():
    # column {1,2} of the Type-I layout: rows 1,2 hold keys, rows 3..6 are
    # parities of the form -(row-1 key) + (row-2 key).
    lay = layout_for(8, 6, 2, 2, Scheme.TYPE_I)
    for x in range(3, 7):
        assert lay.role_of(x, (1, 2)) is Role.PARITY
        partners = parity_partners(x, (1, 2))
        assert sorted((sign, y) for sign, y, _ in partners) == [(-1, 1), (1, 2)]
        for _, y, Y in partners:
            assert lay.role_of(y, Y) is Role.KEY


def test_mbr_equality_of_schemes():
    for d in range(1, 31):
        for ell in range(0, d + 1):
            expected = (d - ell + 1) * (d - ell) // 2
            assert secret_capacity(d, ell, 1, Scheme.TYPE_I) == expected
            assert secret_capacity(d, ell, 1, Scheme.TYPE_II) == expected


def test_sample_keys_determinism_and_bounds():
    a = sample_keys(100, seed=7, q=11)
    b = sample_keys(100, seed=7, q=11)
    assert np.array_equal(a, b)
    assert sample_keys(0, seed=7, q=11).size == 0
    c = sample_keys(100, seed=8, q=11)
    assert not np.array_equal(a, c)
    d = sample_keys(100, seed=7, q=11, stream=1)
    assert not np.array_equal(a, d)
    assert a.min() >= 0 and a.max() < 11
    with pytest.raises(ValueError):
        sample_keys(-1, seed=0, q=11)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_assemble_extract_roundtrip_property(data):
    d = data.draw(st.integers(1, 5))
    m = data.draw(st.integers(1, d))
    scheme = data.draw(st.sampled_from([Scheme.TYPE_I, Scheme.TYPE_II]))
    top = d if scheme is Scheme.TYPE_II else d - 1
    ell = data.draw(st.integers(0, top))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        lay = layout_for(d + 2, d, m, ell, scheme)
    q = lay.sparams.base.q
    s = data.draw(
        st.lists(st.integers(0, q - 1), min_size=lay.secret_count, max_size=lay.secret_count)
    )
    k = data.draw(
        st.lists(st.integers(0, q - 1), min_size=lay.key_count, max_size=lay.key_count)
    )
    M = assemble(lay, np.array(s, dtype=np.int64), np.array(k, dtype=np.int64))
    assert parity_holds(M, lay.sparams.base)
    assert list(extract_secrets(M, lay)) == s
    assert list(extract_keys(M, lay)) == k


def test_key_stream_uniformity_chi_square():
    # deterministic stream, so this is a frozen sanity check, not a flake
    draws = KeyStream(0, 7).draw(100_000)
    counts = np.bincount(draws, minlength=7)
    n, p = 100_000, 1 / 7
    sigma = (n * p * (1 - p)) ** 0.5
    assert np.all(np.abs(counts - n * p) < 3 * sigma)
