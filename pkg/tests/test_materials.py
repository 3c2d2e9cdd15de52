import numpy as np
import pytest

from csfmelt.delta import PhasePair
from csfmelt.errors import InvalidInputError
from csfmelt.materials import TI64, MaterialSet, conductivity, effective_property, heat_capacity


def test_defaults():
    assert TI64.k == PhasePair(0.02863, 28.63)
    assert TI64.rho_cp.liquid == pytest.approx(4087.0 * 1130.0)
    assert TI64.h_v_molar == pytest.approx(8.84e6 * 4.78e-2)
    assert TI64.p_a == 1e5 and TI64.T_v == 3133.0


def test_overrides_and_validation():
    m = TI64.with_overrides(k_l=10.0)
    assert m.k_l == 10.0 and TI64.k_l == 28.63
    with pytest.raises(InvalidInputError):
        TI64.with_overrides(bogus=1.0)
    with pytest.raises(InvalidInputError):
        MaterialSet(rho_l=-1.0)
    with pytest.raises(InvalidInputError):
        MaterialSet(absorptivity=1.5)
    assert MaterialSet(c_s=0.0).c_s == 0.0


def test_round_trip_dict():
    assert MaterialSet(**TI64.to_dict()) == TI64


def test_property_interpolation():
    chi = np.array([0.0, 0.5, 1.0])
    np.testing.assert_allclose(conductivity(TI64, chi), [0.02863, 0.5 * (0.02863 + 28.63), 28.63])
    np.testing.assert_allclose(heat_capacity(TI64, "classical", chi), heat_capacity(TI64, "V1", chi))
    v3 = heat_capacity(TI64, "V3", 0.5)
    assert v3 == pytest.approx(0.5 * (TI64.rho_g + TI64.rho_l) * 0.5 * (TI64.cp_g + TI64.cp_l))


@pytest.mark.parametrize("rule", ["arithmetic", "harmonic", "product-of-pairs", "harmonic-arithmetic"])
def test_effective_property_limits(rule):
    a, b = PhasePair(2.0, 5.0), PhasePair(3.0, 7.0)
    second = b if "-" in rule else None
    lo = effective_property(a, rule, 0.0, second)
    hi = effective_property(a, rule, 1.0, second)
    scale = (3.0, 7.0) if second else (1.0, 1.0)
    assert lo == pytest.approx(2.0 * scale[0]) and hi == pytest.approx(5.0 * scale[1])


def test_effective_property_errors():
    with pytest.raises(InvalidInputError):
        effective_property(PhasePair(1, 2), "geometric", 0.5)
    with pytest.raises(InvalidInputError):
        effective_property(PhasePair(1, 2), "product-of-pairs", 0.5)
