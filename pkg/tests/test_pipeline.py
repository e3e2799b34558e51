import json

import pytest

from bggkit.pipeline import PipelineError, run_pipeline


def test_report_is_byte_stable():
    a = run_pipeline("path-ode", "gl").to_json()
    b = run_pipeline("path-ode", "gl").to_json()
    assert a == b
    data = json.loads(a)
    assert data["schema_version"] == 1 and "timing" not in data


def test_projective_standard_report():
    report = run_pipeline("projective-heis", "standard", with_holonomy=True)
    assert report.solution_dim == 2 and report.holonomy_dim == 2 and report.passed
    assert "dim S^inf: 2" in report.to_text()


def test_cr_adjoint_is_alpha_of_k():
    report = run_pipeline("cr-tube", "adjoint", "automorphism")
    assert report.solution_dim == 7 and report.passed


def test_timing_on_request():
    report = run_pipeline("path-ode", "standard", with_timing=True)
    assert set(report.timing) == {"connection", "solve"}


@pytest.mark.parametrize("args,stage", [(("nowhere", "standard"), "load"), (("path-ode", "spin"), "representation"),
                                        (("path-ode", "standard", "flat"), "connection")])
def test_errors_carry_stage(args, stage):
    with pytest.raises(PipelineError) as info:
        run_pipeline(*args)
    assert info.value.stage == stage
