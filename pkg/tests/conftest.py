from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def run_cli(capsys):
    """Invoke the CLI in-process and return (exit code, parsed JSON lines)."""
    import json

    from cubeslice.cli import main

    def _run(*argv):
        code = main(list(argv))
        out = capsys.readouterr().out.strip().splitlines()
        return code, [json.loads(line) for line in out]

    return _run
