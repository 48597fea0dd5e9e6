from dtholab.fourier import LaurentSeries
from dtholab.inner import FiniteBlaschke, Monomial


def series(**kw):
    """series(z1=1, zbar2=3) -> z + 3 zbar^2; c0 for the constant."""
    out = {}
    for key, c in kw.items():
        if key == "c0":
            out[0] = c
        elif key.startswith("zbar"):
            out[-int(key[4:])] = c
        else:
            out[int(key[1:])] = c
    return LaurentSeries(out)


Z2, Z3 = Monomial(2), Monomial(3)
B05 = FiniteBlaschke((0.5,))


# -- hypothesis strategies ---------------------------------------------------------

from hypothesis import strategies as st  # noqa: E402

# tiny draws become exact zeros so that a support index is either present or absent
real_coefficient = st.floats(-3, 3, allow_nan=False, allow_infinity=False).map(lambda x: x if abs(x) >= 1e-6 else 0.0)
coefficient = st.builds(complex, real_coefficient, real_coefficient)


@st.composite
def banded(draw, lo=-4, hi=4, real=False):
    """A LaurentSeries supported inside [lo, hi]."""
    a = draw(st.integers(lo, hi))
    b = draw(st.integers(a, hi))
    c = draw(st.lists(real_coefficient if real else coefficient, min_size=b - a + 1, max_size=b - a + 1))
    return LaurentSeries.from_array(a, c)
