"""Acceptance gate: every criterion must pass at its stated tolerance.

Each criterion runs once per session; the report line for each is printed so
`pytest -v -s tests/test_acceptance.py` doubles as the acceptance protocol.
"""

import pytest

from vortexmix.acceptance import CRITERIA

_cache = {}


def _run(cid, tmp_path_factory):
    if cid not in _cache:
        kwargs = {}
        if cid == "c9":
            kwargs["out_dir"] = str(tmp_path_factory.mktemp("c9"))
        _cache[cid] = CRITERIA[cid](**kwargs)
    return _cache[cid]


@pytest.mark.parametrize("cid", list(CRITERIA))
def test_criterion(cid, tmp_path_factory):
    result = _run(cid, tmp_path_factory)
    print(result.line())
    for detail in result.details:
        print("   ", detail)
    assert result.passed, "\n".join([result.line(), *result.details])
