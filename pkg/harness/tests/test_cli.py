import json

from click.testing import CliRunner

from model_harness.cli import main


def test_train_then_predict_via_cli(toy_corpus, toy_episodes, tmp_path):
    runner = CliRunner()
    cfg = tmp_path / "run.kv"
    cfg.write_text(
        "\n".join(
            [
                "stage = pretrain",
                "domain = alchemy",
                f"data = {toy_corpus}",
                f"checkpoint_dir = {tmp_path / 'ckpt'}",
                "max_steps = 3",
                "batch_size = 16",
                "learning_rate = 0.001",
                "seed = 2",
                "d_model = 96",
                "feedforward = 192",
                "max_source_len = 256",
                "max_target_len = 48",
            ]
        )
        + "\n",
        "utf-8",
    )
    trained = runner.invoke(main, ["train", "--config", str(cfg)])
    assert trained.exit_code == 0, trained.output
    assert (tmp_path / "ckpt" / "model.pt").exists()

    out = tmp_path / "preds.jsonl"
    predicted = runner.invoke(
        main,
        [
            "predict",
            "--checkpoint", str(tmp_path / "ckpt"),
            "--episodes", str(toy_episodes),
            "--out", str(out),
        ],
    )
    assert predicted.exit_code == 0, predicted.output
    assert predicted.output.strip() == "200"
    rows = [json.loads(l) for l in out.read_text("utf-8").splitlines()]
    assert len(rows) == 200


def test_train_rejects_predict_stage(tmp_path):
    runner = CliRunner()
    cfg = tmp_path / "run.kv"
    cfg.write_text("stage = predict\ndata = x.jsonl\n", "utf-8")
    result = runner.invoke(main, ["train", "--config", str(cfg)])
    assert result.exit_code == 2


def test_set_override_requires_key_value():
    runner = CliRunner()
    result = runner.invoke(main, ["train", "--set", "nonsense"])
    assert result.exit_code == 2
