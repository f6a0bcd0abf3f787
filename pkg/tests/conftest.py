import numpy as np
import pytest

A_REF = np.array([[-2.0, 1.0], [0.0, -3.0]])


@pytest.fixture
def A():
    return A_REF.copy()


def quotient_oracle(fnorm, x, y, h=1e-7):
    """One-sided difference quotient ||y|| (||y + h x|| - ||y||) / h, used as an independent check."""
    return fnorm(y) * (fnorm(y + h * x) - fnorm(y)) / h
