import pytest

import xxzlab.numerics


@pytest.fixture(autouse=True)
def validate_numerics():
    """Residual and orthonormality checks on every eigendecomposition."""
    old = xxzlab.numerics.VALIDATE
    xxzlab.numerics.VALIDATE = True
    yield
    xxzlab.numerics.VALIDATE = old
