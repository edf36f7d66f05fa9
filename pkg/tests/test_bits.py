import numpy as np
import pytest

from scadkit.bits import BitPattern, binary_entropy, binary_entropy_arr, enumerate_patterns


def test_entropy_endpoints_exact():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0


def test_entropy_known_value():
    # frozen from the defining formula
    assert binary_entropy(0.11) == pytest.approx(0.499915958164528, abs=1e-12)


def test_entropy_crosses_half_near_011():
    # independent bisection oracle on h(Q) = 1/2
    lo, hi = 0.05, 0.2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    assert 0.5 * (lo + hi) == pytest.approx(0.110, abs=5e-4)


def test_entropy_domain_handling():
    assert binary_entropy(-1e-13) == 0.0
    assert binary_entropy(1.0 + 1e-13) == 0.0
    with pytest.raises(ValueError):
        binary_entropy(-1e-6)
    with pytest.raises(ValueError):
        binary_entropy(1.0 + 1e-6)


def test_entropy_symmetric():
    for x in np.linspace(0.0, 1.0, 101):
        assert binary_entropy(x) == pytest.approx(binary_entropy(1.0 - x), abs=1e-13)


def test_entropy_concave():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = rng.uniform(0.0, 1.0, size=2)
        mid = binary_entropy(0.5 * (a + b))
        assert mid >= 0.5 * (binary_entropy(a) + binary_entropy(b)) - 1e-12


def test_entropy_arr_matches_scalar():
    xs = np.linspace(0.0, 1.0, 57)
    np.testing.assert_allclose(
        binary_entropy_arr(xs), [binary_entropy(float(x)) for x in xs], atol=1e-14
    )


def test_pattern_bits_and_string():
    pat = BitPattern.from_string("101")
    assert (pat.bit(1), pat.bit(2), pat.bit(3)) == (1, 0, 1)
    assert str(pat) == "101"
    assert pat.value == 5 and pat.width == 3
    with pytest.raises(IndexError):
        pat.bit(4)


def test_pattern_algebra():
    a = BitPattern.from_string("1100")
    b = BitPattern.from_string("1010")
    assert str(a ^ b) == "0110"
    assert str(a & b) == "1000"
    assert (a ^ a).popcount() == 0
    assert a.complement().complement() == a
    with pytest.raises(ValueError):
        a ^ BitPattern.from_string("111")


def test_pattern_validation():
    with pytest.raises(ValueError):
        BitPattern(4, 2)
    with pytest.raises(ValueError):
        BitPattern(0, 0)
    with pytest.raises(ValueError):
        BitPattern.from_string("10a")


def test_enumerate_patterns():
    assert [p.value for p in enumerate_patterns(1)] == [0, 1]
    assert [str(p) for p in enumerate_patterns(2)] == ["00", "01", "10", "11"]
    assert len(enumerate_patterns(3)) == 8
    with pytest.raises(ValueError):
        enumerate_patterns(0)
    with pytest.raises(ValueError):
        enumerate_patterns(17)
