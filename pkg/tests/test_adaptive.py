import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptlq.adaptive import combine, critical_value, per_test_level, threshold_reject
from adaptlq.exceptions import LqError
from adaptlq.variance import normal_quantile, upper_tail

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_examples():
    r = combine({2: 0.03, 6: 0.20})
    assert r.p_ada == 0.03
    assert r.combined_pvalue == pytest.approx(1 - 0.97 ** 2, abs=1e-15)
    assert r.combined_pvalue == pytest.approx(0.0591, abs=1e-12)
    assert not r.reject
    single = combine({2: 0.04})
    assert single.combined_pvalue == pytest.approx(0.04, abs=1e-15) and single.reject
    assert combine({2: 0.0, 4: 0.5}).combined_pvalue == 0.0


def test_validation():
    with pytest.raises(LqError):
        combine({})
    with pytest.raises(LqError):
        combine({3: 0.1})
    with pytest.raises(LqError):
        combine({2: 1.2})


@given(st.dictionaries(st.sampled_from([2, 4, 6, 8]), unit, min_size=1),
       st.sampled_from([2, 4, 6, 8]), unit)
def test_monotone_in_each_pvalue(pvals, q, bump):
    base = combine(pvals)
    raised = dict(pvals)
    raised[q] = max(raised.get(q, 0.0), bump)
    if q not in pvals:
        return
    assert combine(raised).combined_pvalue >= base.combined_pvalue
    assert 0.0 <= base.combined_pvalue <= 1.0


def test_two_forms_agree_on_grid():
    grid = np.linspace(0, 1, 401)
    for alpha in (0.01, 0.05, 0.1, 0.2):
        for k in (1, 2, 3):
            level = per_test_level(alpha, k)
            crit = critical_value(alpha, k)
            for p_min in grid:
                # decisions can only differ by rounding at the exact boundary
                if abs(p_min - level) < 1e-12:
                    continue
                pvals = {2 * (j + 1): (p_min if j == 0 else 1.0) for j in range(k)}
                a = combine(pvals, alpha).reject
                assert a == threshold_reject(pvals, alpha)
                # statistic form: the smallest p-value belongs to the largest T
                if 0 < p_min < 1:
                    t = -normal_quantile(p_min)
                    if abs(t - crit) > 1e-9:
                        assert a == (t > crit)


def test_critical_value_consistent():
    for k in (1, 2, 4):
        assert upper_tail(critical_value(0.05, k)) == pytest.approx(per_test_level(0.05, k),
                                                                    rel=1e-12)
