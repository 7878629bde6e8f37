import csv
import hashlib
import json
import shutil
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
import yaml

from polyframe.cli import main
from polyframe.frames import FRAMES

from conftest import PIPELINE


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def digest(directory):
    return {p.relative_to(directory).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(directory.rglob("*")) if p.is_file()}


@pytest.fixture
def world_copy(synthetic_world, tmp_path):
    root, _ = synthetic_world
    dest = tmp_path / "world"
    shutil.copytree(root, dest, ignore=shutil.ignore_patterns("out"))
    return dest


def edit_config(root, change):
    path = root / "config.yaml"
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    change(data)
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def test_validate_config_ok(synthetic_world, capsys):
    _, config = synthetic_world
    assert main(["--config", str(config), "validate-config"]) == 0
    assert "config ok" in capsys.readouterr().out


def test_validate_config_missing_vector_file(world_copy, capsys):
    (world_copy / "vectors" / "aligned.fr.vec").unlink()
    assert main(["--config", str(world_copy / "config.yaml"), "validate-config"]) == 2
    assert "aligned.fr.vec" in capsys.readouterr().err


def test_validate_config_range_violation(world_copy, capsys):
    config = edit_config(world_copy, lambda d: d.setdefault("lexicon", {}).update(min_sim=1.5))
    assert main(["--config", str(config), "validate-config"]) == 2
    assert "lexicon.min_sim" in capsys.readouterr().err


def test_missing_config_flag(capsys):
    assert main(["score"]) == 2
    assert "--config" in capsys.readouterr().err


def test_score_before_build_lexicons(world_copy, capsys):
    assert main(["--config", str(world_copy / "config.yaml"), "score"]) == 1
    assert "lexicons not found" in capsys.readouterr().err


def test_pipeline_outputs(pipeline_run):
    root, _, _, codes = pipeline_run
    assert all(code == 0 for code in codes.values()), codes
    report = root / "out" / "report"
    for name in ("agreement_by_frame", "salience_language", "salience_region"):
        rows = read_csv(report / f"{name}.csv")
        assert [r[0] for r in rows[1:]] == [f.label for f in FRAMES]
    assert read_csv(report / "salience_language.csv")[0][1:] == ["ru", "fr", "es", "it"]
    pairs = [json.loads(line) for line in open(root / "out" / "pairs.jsonl", encoding="utf-8")]
    assert pairs and all(abs(p["time_delta_days"]) <= 28 for p in pairs)
    assert all(p["source_id"].startswith("ru") and not p["candidate_id"].startswith("ru") for p in pairs)
    agreement = read_csv(root / "out" / "agreement_dominant.csv")
    assert agreement[0] == ["language", "articles", "decided", "raw_agreement", "krippendorff_alpha"]


def test_pipeline_is_idempotent_and_leaves_inputs_alone(pipeline_run, tmp_path):
    root, config, _, _ = pipeline_run
    first = digest(root / "out")
    inputs = {k: v for k, v in digest(root).items() if not k.startswith("out/")}
    # Re-run the downstream stages in place; pairing is repeated by the acceptance suite timing.
    for step in PIPELINE[1:]:
        assert main(["--config", str(config), "--workers", "1", step]) == 0
    assert digest(root / "out") == first
    assert {k: v for k, v in digest(root).items() if not k.startswith("out/")} == inputs


def test_pair_rerun_is_byte_identical(pipeline_run):
    root, config, _, _ = pipeline_run
    before = (root / "out" / "pairs.jsonl").read_bytes()
    assert main(["--config", str(config), "--workers", "1", "pair"]) == 0
    assert (root / "out" / "pairs.jsonl").read_bytes() == before


def test_eval_intruder_generate_and_score(pipeline_run, tmp_path):
    root, config, _, _ = pipeline_run
    assert main(["--config", str(config), "eval-intruder"]) == 0
    key = root / "out" / "intruder" / "fr_key.csv"
    rows = list(csv.DictReader(open(key, encoding="utf-8", newline="")))
    assert rows
    responses = tmp_path / "responses.csv"
    with open(responses, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["set_id", "annotator_id", "chosen_index"])
        for r in rows:
            w.writerow([r["set_id"], "A", r["intruder_index"]])
            w.writerow([r["set_id"], "B", (int(r["intruder_index"]) + 1) % 6])
    out = tmp_path / "scores.csv"
    assert main(["--config", str(config), "eval-intruder", "--key", str(key), "--responses", str(responses),
                 "--out", str(out)]) == 0
    table = read_csv(out)
    assert table[0] == ["frame_code", "frame", "soft", "hard", "flagged"]
    assert all(r[2] == "100.0" and r[3] == "0.0" for r in table[1:])


def test_eval_f1(synthetic_world, tmp_path):
    _, config = synthetic_world
    (tmp_path / "p.csv").write_text("item_id,frame_code\na,1\nb,3\nc,3\n")
    (tmp_path / "g.csv").write_text("item_id,frame_code\na,1\nb,1\nc,3\n")
    out = tmp_path / "f1.csv"
    assert main(["--config", str(config), "eval-f1", "--predicted", str(tmp_path / "p.csv"),
                 "--gold", str(tmp_path / "g.csv"), "--out", str(out)]) == 0
    assert read_csv(out)[-1][4] == "66.7"
    assert (tmp_path / "f1_confusion.csv").is_file()


class _Endpoint(BaseHTTPRequestHandler):
    status = 200

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.status != 200:
            self.send_response(self.status)
            self.end_headers()
            self.wfile.write(b"invalid credentials")
            return
        reply = json.dumps({"translations": body["texts"]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(reply)

    def log_message(self, *args):
        pass


@pytest.fixture
def endpoint(monkeypatch):
    servers = []

    def start(status=200):
        handler = type("Handler", (_Endpoint,), {"status": status})
        server = HTTPServer(("127.0.0.1", 0), handler)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        servers.append(server)
        monkeypatch.setenv("TRANSLATE_API_URL", f"http://127.0.0.1:{server.server_port}/translate")
        monkeypatch.setenv("TRANSLATE_API_KEY", "test-key")

    yield start
    for s in servers:
        s.shutdown()
        s.server_close()


def test_fetch_translations_identity(endpoint, synthetic_world, tmp_path):
    endpoint()
    _, config = synthetic_world
    words = [f"word{i}" for i in range(250)]
    (tmp_path / "words.txt").write_text("\n".join(words + words[:10]) + "\n")
    out = tmp_path / "en_fr.tsv"
    assert main(["--config", str(config), "fetch-translations", "--words", str(tmp_path / "words.txt"),
                 "--target", "fr", "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) <= 250
    assert all(src == tgt for src, tgt in (line.split("\t") for line in lines))


def test_fetch_translations_auth_failure(endpoint, synthetic_world, tmp_path, capsys):
    endpoint(401)
    _, config = synthetic_world
    (tmp_path / "words.txt").write_text("tax\n")
    code = main(["--config", str(config), "fetch-translations", "--words", str(tmp_path / "words.txt"),
                 "--target", "fr", "--out", str(tmp_path / "t.tsv")])
    assert code == 1
    assert "authentication" in capsys.readouterr().err


def test_fetch_translations_unreachable(monkeypatch, synthetic_world, tmp_path, capsys):
    monkeypatch.setenv("TRANSLATE_API_URL", "http://127.0.0.1:9/none")
    monkeypatch.setenv("TRANSLATE_API_KEY", "k")
    _, config = synthetic_world
    (tmp_path / "words.txt").write_text("tax\n")
    assert main(["--config", str(config), "fetch-translations", "--words", str(tmp_path / "words.txt"),
                 "--target", "fr", "--out", str(tmp_path / "t.tsv")]) == 1
    assert "unreachable" in capsys.readouterr().err


def test_make_synthetic_small(tmp_path, capsys):
    assert main(["make-synthetic", "--out-dir", str(tmp_path / "w"), "--articles", "60"]) == 0
    config = capsys.readouterr().out.strip()
    assert main(["--config", config, "validate-config"]) == 0
