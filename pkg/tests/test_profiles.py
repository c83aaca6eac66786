import pytest

from mftpe.errors import ArityMismatch
from mftpe.profiles import PROFILE_NAMES, Factor, FactorProfile


class TestFactorProfile:
    @pytest.mark.parametrize("name", PROFILE_NAMES)
    def test_name_and_id_round_trip(self, name):
        p = FactorProfile.from_name(name)
        assert p.name == name
        assert FactorProfile.from_id(p.profile_id).name == name

    def test_ids_are_distinct(self):
        assert len({FactorProfile.from_name(n).profile_id for n in PROFILE_NAMES}) == len(PROFILE_NAMES)

    def test_alias(self):
        assert FactorProfile.from_name("sum-only") == FactorProfile.sum_only(2)

    def test_fixed_arities(self):
        assert FactorProfile.sum_geomean().n == 3
        assert FactorProfile.sum_weighted().n == 3
        assert FactorProfile.sum_range().n == 2
        with pytest.raises(ArityMismatch):
            FactorProfile(Factor.SUM_GEOMEAN, 2)
        with pytest.raises(ArityMismatch):
            FactorProfile(Factor.SUM_ONLY, 4)

    def test_weights(self):
        p = FactorProfile.sum_weighted([1, 2, 3])
        assert p.weights == (1, 2, 3)
        assert FactorProfile.sum_weighted().with_weights((4, 5, 6)).weights == (4, 5, 6)
        for bad in [(1, 2), (0, 1, 2), (1, 2, 256)]:
            with pytest.raises(ValueError):
                FactorProfile.sum_weighted(bad)
        with pytest.raises(ValueError):
            FactorProfile(Factor.SUM_RANGE, 2, (1, 2, 3))

    def test_unknown(self):
        with pytest.raises(ValueError):
            FactorProfile.from_name("sum-median")
        with pytest.raises(ValueError):
            FactorProfile.from_id(42)
