"""End-to-end command-line checks on a small synthetic dataset.

Each class uses a disjoint slice of the residue alphabet, so the rendered
images are trivially separable and the eval command should score perfectly.
"""

import csv
import json

import pytest

from cgrips.cli import main
from cgrips.seqio import load_dataset, load_split, read_manifest

TOY_ROWS = [
    # alpha-class: first-arc residues; beta: middle; gamma: last.
    ("a1", "ACDACDACD", "alpha"),
    ("a2", "CDACDACDACDA", "alpha"),
    ("a3", "DACDACDA", "alpha"),
    ("a4", "ACDCADACDCA", "alpha"),
    ("a5", "CCDDAACCDD", "alpha"),
    ("a6", "ADCADCADCADC", "alpha"),
    ("b1", "LMNLMNLMN", "beta"),
    ("b2", "MNLMNLMNLMNL", "beta"),
    ("b3", "NLMNLMNL", "beta"),
    ("b4", "LMNMLNLMNML", "beta"),
    ("b5", "MMNNLLMMNN", "beta"),
    ("b6", "NMLNMLNMLNML", "beta"),
    ("c1", "VWYVWYVWY", "gamma"),
    ("c2", "WYVWYVWYVWYV", "gamma"),
    ("c3", "YVWYVWYV", "gamma"),
    ("c4", "VWYWVYVWYWV", "gamma"),
    ("c5", "WWYYVVWWYY", "gamma"),
    ("c6", "YWVYWVYWVYWV", "gamma"),
]


@pytest.fixture(scope="module")
def toy_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "toy.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "sequence", "label"])
        w.writerows(TOY_ROWS)
    return str(path)


def test_stats_command(toy_csv, tmp_path, capsys):
    out = tmp_path / "stats"
    assert main(["stats", toy_csv, "--out-dir", str(out)]) == 0
    with open(out / "stats.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert {r["label"]: int(r["count"]) for r in rows} == {
        "alpha": 6, "beta": 6, "gamma": 6
    }
    assert (out / "class_counts.png").stat().st_size > 0
    assert (out / "length_hist.png").stat().st_size > 0
    assert "total" in capsys.readouterr().out


def test_split_command(toy_csv, tmp_path):
    out = tmp_path / "split"
    assert main(["split", toy_csv, "--out-dir", str(out), "--seed", "1"]) == 0
    split = load_split(out / "split.json")
    # Per class of 6: 1 test, 2 validation (round-half-up of 5 * 0.3), 3 train.
    assert len(split.test) == 3
    assert len(split.validation) == 6
    assert len(split.train) == 9
    run = json.loads((out / "run_config.json").read_text())
    assert run["command"] == "split"
    assert run["config"]["seed"] == 1


def test_batch_command(toy_csv, tmp_path):
    out = tmp_path / "batch"
    assert main(
        ["batch", toy_csv, "--out-dir", str(out), "--make-split"]
    ) == 0
    entries = read_manifest(out / "manifest.jsonl")
    assert [e.id for e in entries] == sorted(r[0] for r in TOY_ROWS)
    for e in entries:
        assert (out / e.image_path).stat().st_size > 0
        assert e.split in {"train", "validation", "test"}
        assert e.epsilon == 0.3 and e.image_size == 224
    assert (out / "split.json").exists()
    assert (out / "run_config.json").exists()


def test_batch_threads_do_not_change_bytes(toy_csv, tmp_path):
    outs = []
    for threads in (1, 2):
        out = tmp_path / f"t{threads}"
        assert main(
            ["batch", toy_csv, "--out-dir", str(out), "--threads", str(threads)]
        ) == 0
        outs.append(out)
    for e in read_manifest(outs[0] / "manifest.jsonl"):
        b0 = (outs[0] / e.image_path).read_bytes()
        b1 = (outs[1] / e.image_path).read_bytes()
        assert b0 == b1, e.id
    assert (outs[0] / "manifest.jsonl").read_bytes() == (
        outs[1] / "manifest.jsonl"
    ).read_bytes()


def test_sweep_command(toy_csv, tmp_path):
    out = tmp_path / "sweep"
    assert main(
        ["sweep", toy_csv, "--out-dir", str(out), "--epsilons", "0.15,0.4"]
    ) == 0
    with open(out / "sweep.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert [float(r["epsilon"]) for r in rows] == [0.15, 0.4]
    assert int(rows[0]["total_edges"]) <= int(rows[1]["total_edges"])
    assert int(rows[0]["total_ink_pixels"]) <= int(rows[1]["total_ink_pixels"])
    assert (out / "sweep.png").stat().st_size > 0
    assert (out / "eps_0.15" / "manifest.jsonl").exists()
    assert (out / "eps_0.4" / "manifest.jsonl").exists()


def test_sweep_requires_epsilons(toy_csv, tmp_path):
    assert main(["sweep", toy_csv, "--out-dir", str(tmp_path / "x")]) == 2


def test_persistence_literal_sequence(tmp_path, capsys):
    out = tmp_path / "pers"
    rc = main(
        ["persistence", "--sequence", "ACDEFGHIKLMNPQRSTVWYAAAA",
         "--out-dir", str(out)]
    )
    assert rc == 0
    cx = json.loads((out / "complex.json").read_text())
    assert len(cx["coords"]) == 24
    assert len(cx["edges"]) == 26
    pairs = json.loads((out / "persistence.json").read_text())["pairs"]
    assert sum(1 for _, death in pairs if death is None) == 1
    assert sum(1 for _, death in pairs if death is not None) == 23
    for name in ("complex.png", "diagram.png", "barcode.png"):
        assert (out / name).stat().st_size > 0
    assert "24 vertices, 26 edges" in capsys.readouterr().out


def test_persistence_by_id(toy_csv, tmp_path):
    out = tmp_path / "pers-id"
    assert main(
        ["persistence", toy_csv, "--id", "a1", "--out-dir", str(out)]
    ) == 0
    assert (out / "persistence.json").exists()
    assert main(
        ["persistence", toy_csv, "--id", "zz", "--out-dir", str(out)]
    ) == 2


def test_perturb_plain(toy_csv, tmp_path):
    out = tmp_path / "perturb"
    assert main(
        ["perturb", toy_csv, "--out-dir", str(out), "--mutations-n", "2"]
    ) == 0
    back = load_dataset(str(out / "perturbed.csv"))
    assert [s.id for s in back.dataset.sequences] == [r[0] for r in TOY_ROWS]
    changed = sum(
        s.residues != orig
        for s, (_, orig, _) in zip(back.dataset.sequences, TOY_ROWS)
    )
    assert changed == len(TOY_ROWS)  # two point mutations always change something


def test_eval_on_manifest(toy_csv, tmp_path, capsys):
    out = tmp_path / "batch-eval"
    assert main(
        ["batch", toy_csv, "--out-dir", str(out), "--make-split"]
    ) == 0
    ev = tmp_path / "eval"
    assert main(
        ["eval", str(out / "manifest.jsonl"), "--out-dir", str(ev)]
    ) == 0
    metrics = json.loads((ev / "metrics.json").read_text())
    # Disjoint residue arcs make the toy classes perfectly separable.
    assert metrics["accuracy"] == 1.0
    preds = (ev / "predictions.jsonl").read_text().splitlines()
    assert len(preds) == 3  # one test item per class
    assert (ev / "confusion.png").stat().st_size > 0
    assert "accuracy=1.0000" in capsys.readouterr().out


def test_eval_on_csv(toy_csv, tmp_path):
    ev = tmp_path / "eval-csv"
    assert main(["eval", toy_csv, "--out-dir", str(ev)]) == 0
    metrics = json.loads((ev / "metrics.json").read_text())
    assert metrics["accuracy"] == 1.0
    run = json.loads((ev / "run_config.json").read_text())
    assert run["chosen_k"] in (1, 3, 5, 7)


def test_mcnemar_counts(tmp_path, capsys):
    out = tmp_path / "mc.json"
    assert main(["mcnemar", "--counts", "10", "0", "--out", str(out)]) == 0
    assert "p=0.00195312" in capsys.readouterr().out
    payload = json.loads(out.read_text())
    assert payload["b"] == 10 and payload["c"] == 0
    assert payload["p_value"] == pytest.approx(0.001953125, abs=1e-12)


def test_mcnemar_requires_input():
    assert main(["mcnemar"]) == 2


def test_synth_command(tmp_path):
    out = tmp_path / "breast.csv"
    assert main(["synth", "breast", "--out", str(out)]) == 0
    result = load_dataset(str(out))
    assert len(result.dataset) == 949
    assert not result.skipped


def test_missing_input_is_io_error(tmp_path):
    assert main(
        ["stats", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path)]
    ) == 4


def test_invalid_flag_value_is_input_error(toy_csv, tmp_path):
    assert main(
        ["batch", toy_csv, "--out-dir", str(tmp_path / "x"), "--alpha", "1.5"]
    ) == 2


def test_config_file_overrides_defaults(toy_csv, tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps({"alpha": 0.7, "seed": 5}))
    out = tmp_path / "out"
    assert main(
        ["split", toy_csv, "--config", str(cfg_path), "--out-dir", str(out)]
    ) == 0
    run = json.loads((out / "run_config.json").read_text())
    assert run["config"]["alpha"] == 0.7
    assert run["config"]["seed"] == 5


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "cgrips" in capsys.readouterr().out
