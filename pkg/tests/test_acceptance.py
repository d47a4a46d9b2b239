"""Acceptance criteria 1-10 at their stated tolerances; one summary line each."""

from __future__ import annotations

import pytest

from lensmaslov import acceptance
from lensmaslov.genfun import coupling_sign_mutation

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("fn", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(fn):
    res = fn()
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, res.details


def test_mutation_breaks_graph_oracle():
    with coupling_sign_mutation():
        res = acceptance.criterion_5(pairs=3)
    assert not res.passed
    assert res.value[0] > 1e-3
