import numpy as np
import pytest

from hedgedmc.charts import emit_fan_chart, emit_scatter_chart
from hedgedmc.engine import quantile_fan


class TestFanChart:
    def test_constant_series_flat_band(self, tmp_path):
        fan = quantile_fan(np.full((20, 5), 7.0), (0.05, 0.95))
        dest = tmp_path / "fan.svg"
        emit_fan_chart(fan, dest)
        svg = dest.read_text()
        assert svg.startswith("<svg ")
        assert svg.rstrip().endswith("</svg>")
        assert "polygon" in svg and "polyline" in svg

    def test_two_point_table_has_two_x_ticks(self, tmp_path):
        fan = quantile_fan(np.array([[1.0, 2.0], [3.0, 1.0], [2.0, 4.0]]), (0.05, 0.95))
        dest = tmp_path / "fan.svg"
        emit_fan_chart(fan, dest, steps=np.array([0, 1]))
        svg = dest.read_text()
        x_tick_labels = [line for line in svg.splitlines()
                         if 'text-anchor="middle"' in line and "rotate" not in line]
        # two tick labels plus the axis title
        assert len(x_tick_labels) == 3

    def test_byte_deterministic(self, tmp_path):
        rng = np.random.default_rng(1)
        fan = quantile_fan(rng.normal(size=(40, 9)), (0.05, 0.5, 0.95))
        d1, d2 = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_fan_chart(fan, d1)
        emit_fan_chart(fan, d2)
        assert d1.read_bytes() == d2.read_bytes()

    def test_empty_rejected(self, tmp_path):
        from hedgedmc.engine import QuantileFan
        bad = QuantileFan(probs=(0.5,), quantiles=np.empty((1, 0)), mean=np.empty(0))
        with pytest.raises(ValueError, match="empty"):
            emit_fan_chart(bad, tmp_path / "x.svg")


class TestScatterChart:
    def test_markers_and_legend(self, tmp_path):
        rng = np.random.default_rng(2)
        x = rng.uniform(50, 150, 30)
        dest = tmp_path / "scatter.svg"
        emit_scatter_chart(x, [("option", rng.uniform(0, 5, 30), "circle"),
                               ("intrinsic", rng.uniform(-2, 3, 30), "cross")], dest)
        svg = dest.read_text()
        assert svg.count("<circle") == 30
        assert svg.count("<path") == 30
        assert "option" in svg and "intrinsic" in svg

    def test_deterministic(self, tmp_path):
        x = np.linspace(1, 9, 17)
        series = [("v", np.sin(x), "circle")]
        d1, d2 = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_scatter_chart(x, series, d1)
        emit_scatter_chart(x, series, d2)
        assert d1.read_bytes() == d2.read_bytes()

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            emit_scatter_chart(np.empty(0), [("v", np.empty(0), "circle")],
                               tmp_path / "x.svg")
