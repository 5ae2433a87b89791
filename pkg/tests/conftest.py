import pytest

from elgeo.axioms import Signature


@pytest.fixture
def tiny_sig():
    sig = Signature()
    for name in "ABCDEFGH":
        sig.intern_class(name)
    for name in ("r", "s"):
        sig.intern_relation(name)
    return sig
