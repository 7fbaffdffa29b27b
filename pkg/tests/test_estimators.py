"""Estimator wrappers: sklearn contract (get_params/set_params/clone),
input coercion, and batch predict/transform plumbing."""

import numpy as np
import pytest
from sklearn.base import clone

from ocuscreen.estimators import (
    BlinkAnalyzer,
    ColorIndexAnalyzer,
    LesionAnalyzer,
    PupilAnalyzer,
    RednessAnalyzer,
    as_image,
    as_trace,
)
from ocuscreen.colorspace import Bgr8Image
from ocuscreen.ingest import encode_png, serialize_trace

ALL = [RednessAnalyzer, ColorIndexAnalyzer, BlinkAnalyzer, PupilAnalyzer, LesionAnalyzer]


class TestSklearnContract:
    @pytest.mark.parametrize("cls", ALL)
    def test_clone_round_trips_params(self, cls):
        est = cls()
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_set_params(self):
        est = ColorIndexAnalyzer().set_params(triage_threshold=0.1)
        assert est.get_params()["triage_threshold"] == 0.1

    @pytest.mark.parametrize("cls", ALL)
    def test_fit_returns_self(self, cls):
        est = cls()
        assert est.fit([None]) is est


class TestCoercion:
    def test_as_image_passthrough_and_array(self, plain_eye):
        img, _ = plain_eye
        assert as_image(img) is img
        again = as_image(img.data)
        assert np.array_equal(again.data, img.data)

    def test_as_image_bytes_and_path(self, plain_eye, tmp_path):
        img, _ = plain_eye
        payload = encode_png(img)
        assert np.array_equal(as_image(payload).data, img.data)
        path = tmp_path / "eye.png"
        path.write_bytes(payload)
        assert np.array_equal(as_image(path).data, img.data)
        assert np.array_equal(as_image(str(path)).data, img.data)

    def test_as_image_rejects_unknown(self):
        with pytest.raises(TypeError):
            as_image(3.14)

    def test_as_trace_forms(self, blink_trace, tmp_path):
        trace = blink_trace[0]
        assert as_trace(trace) is trace
        wire = serialize_trace(trace)
        assert as_trace(wire) == trace
        path = tmp_path / "t.jsonl"
        path.write_bytes(wire)
        assert as_trace(path) == trace

    def test_as_trace_rejects_unknown(self):
        with pytest.raises(TypeError):
            as_trace(42)


class TestBatch:
    def test_redness_predict_matches_analyze(self, plain_eye):
        img, _ = plain_eye
        est = RednessAnalyzer()
        scores = est.predict([img, img])
        assert scores.shape == (2,)
        assert scores[0] == scores[1] == est.analyze(img)["score"]

    def test_transform_is_column(self, plain_eye):
        img, _ = plain_eye
        out = RednessAnalyzer().transform([img])
        assert out.shape == (1, 1)

    def test_color_transform_two_columns(self, plain_eye):
        img, _ = plain_eye
        est = ColorIndexAnalyzer()
        out = est.transform([img, img])
        assert out.shape == (2, 2)
        p = est.analyze(img)
        assert tuple(out[0]) == (p["yellow_index"], p["pallor_index"])

    def test_blink_predict(self, blink_trace):
        est = BlinkAnalyzer()
        rates = est.predict([blink_trace[0]])
        assert rates[0] == est.analyze(blink_trace[0])["rate_bpm"]

    def test_pupil_param_plumbs(self, pir_trace):
        trace, truth = pir_trace
        payload = PupilAnalyzer(t_stim=3.0).analyze(trace)
        assert payload["latency_ms"] == pytest.approx(
            truth["expected_latency_ms"], abs=1000.0 / 30.0 + 1e-9
        )

    def test_lesion_sector_param(self, plain_eye):
        img, _ = plain_eye
        payload = LesionAnalyzer(sector="literal").analyze(img)
        assert payload["sector_mode"] == "literal"

    def test_gray_image_error_propagates(self, gray_image):
        with pytest.raises(Exception) as exc:
            RednessAnalyzer().predict([gray_image])
        assert getattr(exc.value, "code", "") == "insufficient_sclera"
