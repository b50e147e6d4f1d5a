import sys
from fractions import Fraction
from pathlib import Path

from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from nonneg_basis.stepfn import StepFunction  # noqa: E402

rationals = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 20))


@st.composite
def step_functions(draw, max_support=3, max_resolution=3, nonnegative=False):
    J = draw(st.integers(1, max_support))
    r = draw(st.integers(0, max_resolution))
    values = draw(st.lists(rationals, min_size=J << r, max_size=J << r))
    if nonnegative:
        values = [abs(v) for v in values]
    return StepFunction(J, r, values)
