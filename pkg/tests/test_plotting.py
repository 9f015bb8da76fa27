import matplotlib

from msl import worked
from msl.frame import OMEGA, Frame, rank
from msl.plotting import draw_map, layout, save_frame, save_subdivision
from msl.subdivision import subdivide

PNG = b"\x89PNG\r\n\x1a\n"


def test_backend_is_headless():
    assert matplotlib.get_backend().lower() == "agg"


def test_layout_rows_follow_rank():
    fr = Frame.from_edges("abcd", [("a", "b"), ("b", "c"), ("d", "d")])
    pos = layout(fr)
    ranks = rank(fr)
    ys = {i: pos[i][1] for i in range(len(fr))}
    assert ys[0] > ys[1] > ys[2]
    assert ranks[3] is OMEGA and ys[3] >= max(ys.values())


def test_pngs_are_written(tmp_path, x_ex, f1):
    loops = Frame.from_edges("ab", [("a", "a"), ("a", "b"), ("b", "a")])
    save_frame(loops, tmp_path / "loops.png", title="loops")
    draw_map(worked.f_ex(), tmp_path / "map.png")
    result = subdivide(worked.f_ex())
    save_subdivision(result, x_ex, f1, tmp_path / "sub.png")
    for name in ("loops.png", "map.png", "sub.png"):
        data = (tmp_path / name).read_bytes()
        assert data.startswith(PNG) and len(data) > 1000
