import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from ivorra_watkins.ingest import CurveDatabase, IngestError, fetch, read_csv
from ivorra_watkins.watkins import WatkinsError

ROWS = {
    "116c1": {"a": -10, "b": 29, "modular_degree": 15, "manin_constant": 1, "rank": 0},
    "bad": {"a": 1, "b": 1, "modular_degree": 4, "manin_constant": 0, "rank": 0},
}


@pytest.fixture
def server():
    hits = []

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            hits.append(self.path)
            label = self.path.rsplit("/", 1)[-1]
            if not self.path.startswith("/curve/") or label not in ROWS:
                self.send_response(404)
                self.end_headers()
                return
            body = json.dumps(ROWS[label]).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    httpd = HTTPServer(("127.0.0.1", 0), Handler)
    t = threading.Thread(target=httpd.serve_forever, daemon=True)
    t.start()
    yield f"http://127.0.0.1:{httpd.server_port}", hits
    httpd.shutdown()


def test_fixture_csv(curves_csv):
    rows = read_csv(curves_csv)
    assert {r.label for r in rows} == {"116c1", "116c2", "328a1", "328a2"}
    db = CurveDatabase(rows)
    r = db.lookup(-10, 29)
    assert (r.modular_degree, r.manin_constant, r.rank) == (15, 1, 0)
    assert db.lookup(5, -1).manin_constant == 2
    assert db.lookup(1, 2) is None


def test_extra_columns_ignored(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("label,a,b,modular_degree,manin_constant,rank,note\nx,5,-1,30,2,0,hello\n")
    assert read_csv(p)[0].modular_degree == 30


def test_missing_column(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("label,a,b,modular_degree,rank\nx,5,-1,30,0\n")
    with pytest.raises(WatkinsError, match="manin_constant"):
        read_csv(p)


@pytest.mark.parametrize("m,c", [(0, 1), (4, 0), (-2, 1)])
def test_nonpositive_constants_rejected(tmp_path, m, c):
    p = tmp_path / "c.csv"
    p.write_text(f"label,a,b,modular_degree,manin_constant,rank\nx,5,-1,{m},{c},0\n")
    with pytest.raises(WatkinsError):
        read_csv(p)


def test_unreadable_file(tmp_path):
    with pytest.raises(IngestError):
        read_csv(tmp_path / "nope.csv")


def test_fetch_and_cache(server, tmp_path):
    url, hits = server
    r = fetch("116c1", url, cache=tmp_path)
    assert (r.a, r.b, r.modular_degree) == (-10, 29, 15)
    assert r.provenance.startswith("http:")
    assert (tmp_path / "116c1.json").exists()
    fetch("116c1", url, cache=tmp_path)
    assert hits == ["/curve/116c1"]


def test_fetch_errors(server, tmp_path, monkeypatch):
    url, _ = server
    monkeypatch.delenv("IVORRA_WATKINS_DATA_URL", raising=False)
    with pytest.raises(IngestError):
        fetch("missing", url, cache=tmp_path)
    with pytest.raises(WatkinsError):
        fetch("bad", url, cache=tmp_path)
    with pytest.raises(IngestError):
        fetch("116c1", None, cache=tmp_path / "other")
