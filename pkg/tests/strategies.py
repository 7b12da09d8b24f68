import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dyadlab.stepfun import StepFunction
from dyadlab.symbols import SymbolSequence
from dyadlab.weights import Weight

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
depths = st.integers(1, 7)


@st.composite
def step_functions(draw, depth=None):
    n = draw(depths) if depth is None else depth
    return StepFunction(draw(arrays(np.float64, 1 << n, elements=finite)))


@st.composite
def symbol_sequences(draw, depth=None):
    n = draw(depths) if depth is None else depth
    return SymbolSequence(draw(arrays(np.float64, (1 << n) - 1, elements=finite)))


@st.composite
def weights(draw, depth=None):
    n = draw(depths) if depth is None else depth
    dens = draw(arrays(np.float64, 1 << n, elements=st.floats(1e-3, 1e3)))
    return Weight(StepFunction(dens))


@st.composite
def symbol_pairs(draw):
    n = draw(depths)
    return draw(symbol_sequences(n)), draw(symbol_sequences(n))
