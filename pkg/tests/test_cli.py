"""End-to-end command-line tests; every command runs in process via main()."""
from pathlib import Path

import pytest

from lexner.cli import (
    PipelineConfig,
    apply_config_pair,
    main,
    parse_config_text,
)
from lexner.corpus import TagScheme, load_column_file, validate_tags
from lexner.embed import load_embeddings
from lexner.errors import UsageError
from lexner.lexsim import load_ls_table
from lexner.tagger.model import load_checkpoint

# ---------------------------------------------------------------------------
# Config document parsing
# ---------------------------------------------------------------------------

class TestConfigParsing:
    def test_sections_reach_their_configs(self):
        cfg = PipelineConfig()
        parse_config_text(
            "# comment\n"
            "\n"
            "embed.window = 3\n"
            "embed.learning_rate = 0.04\n"
            "tagger.dropout_prob = 0.2\n"
            "tagger.mask_decode = false\n"
            "paths.embeddings = some/file.vec\n",
            cfg,
        )
        assert cfg.embed.window == 3
        assert cfg.embed.learning_rate == 0.04
        assert cfg.tagger.dropout_prob == 0.2
        assert cfg.tagger.mask_decode is False
        assert cfg.paths["embeddings"] == "some/file.vec"

    def test_root_seed_sets_both_sections(self):
        cfg = PipelineConfig()
        apply_config_pair(cfg, "seed", "4")
        assert cfg.embed.seed == 4 and cfg.tagger.seed == 4
        apply_config_pair(cfg, "tagger.seed", "9")
        assert cfg.embed.seed == 4 and cfg.tagger.seed == 9

    def test_features_list_parsed_and_checked(self):
        cfg = PipelineConfig()
        apply_config_pair(cfg, "tagger.features", "word_emb, char")
        assert cfg.tagger.features == ("word_emb", "char")
        with pytest.raises(UsageError, match="unknown feature"):
            apply_config_pair(cfg, "tagger.features", "word_emb,bogus")

    @pytest.mark.parametrize(
        "line",
        [
            "embed.widnow = 5",
            "bogus = 1",
            "paths.bogus = x",
            "tagger = 1",
            "embed.dim 5",
        ],
    )
    def test_bad_lines_rejected(self, line):
        with pytest.raises(UsageError):
            parse_config_text(line, PipelineConfig())

    def test_type_errors_name_the_key(self):
        with pytest.raises(UsageError, match="embed.dim"):
            parse_config_text("embed.dim = wide", PipelineConfig())
        with pytest.raises(UsageError, match="boolean"):
            parse_config_text("tagger.mask_decode = maybe", PipelineConfig())


# ---------------------------------------------------------------------------
# prepare-dual
# ---------------------------------------------------------------------------

FIGURE_ROWS = [
    ("On", "O"),
    ("October", "B-/date"),
    ("9", "I-/date"),
    (",", "I-/date"),
    ("2009", "L-/date"),
    (",", "O"),
    ("the", "O"),
    ("Norwegian", "B-/organization/government_agency"),
    ("Nobel", "I-/organization/government_agency"),
    ("Committee", "L-/organization/government_agency"),
    ("announced", "O"),
    ("that", "O"),
    ("Obama", "U-/person/politician"),
    ("had", "O"),
    ("won", "O"),
    ("the", "O"),
    ("2009", "B-/award"),
    ("Nobel", "I-/award"),
    ("Peace", "I-/award"),
    ("Prize", "L-/award"),
    (".", "O"),
]

FIGURE_TYPES = "/date /organization/government_agency /person/politician /award".split()


class TestPrepareDual:
    def test_announcement_sentence_dual_views(self, tmp_path):
        src = tmp_path / "in.txt"
        src.write_text("".join(f"{w} {t}\n" for w, t in FIGURE_ROWS))
        inv = tmp_path / "types.txt"
        inv.write_text("".join(t + "\n" for t in FIGURE_TYPES))
        out = tmp_path / "dual.txt"
        assert main(["prepare-dual", "--input", str(src), "--inventory", str(inv),
                     "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines == [
            "on october 9 , 2009 , the norwegian nobel committee announced "
            "that obama had won the 2009 nobel peace prize .",
            "on /date , the /organization/government_agency announced that "
            "/person/politician had won the /award .",
        ]

    def test_empty_input_empty_output(self, tmp_path):
        src = tmp_path / "in.txt"
        src.write_text("")
        inv = tmp_path / "types.txt"
        inv.write_text("/date\n")
        out = tmp_path / "dual.txt"
        assert main(["prepare-dual", "--input", str(src), "--inventory", str(inv),
                     "--output", str(out)]) == 0
        assert out.read_text() == ""

    def test_unknown_type_label_names_the_line(self, tmp_path, capsys):
        src = tmp_path / "in.txt"
        src.write_text("the O\nfox U-/animal\n\niron U-/bogus\n")
        inv = tmp_path / "types.txt"
        inv.write_text("/animal\n")
        out = tmp_path / "dual.txt"
        rc = main(["prepare-dual", "--input", str(src), "--inventory", str(inv),
                   "--output", str(out)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "line 4" in err and "/bogus" in err

    def test_broken_tag_sequence_names_the_line(self, tmp_path, capsys):
        src = tmp_path / "in.txt"
        src.write_text("the O\n\niron I-/animal\n")
        inv = tmp_path / "types.txt"
        inv.write_text("/animal\n")
        rc = main(["prepare-dual", "--input", str(src), "--inventory", str(inv),
                   "--output", str(tmp_path / "dual.txt")])
        assert rc == 2
        assert "line 3" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# The composed pipeline on a generated corpus
# ---------------------------------------------------------------------------

TRAIN_FLAGS = [
    "--set", "tagger.word_hidden=16", "--set", "tagger.char_emb_dim=8",
    "--set", "tagger.char_hidden=6", "--set", "tagger.cap_emb_dim=4",
    "--set", "tagger.dropout_prob=0.15",
]


@pytest.fixture(scope="module")
def pipe(tmp_path_factory):
    """synth -> prepare-dual -> train-embed -> build-ls -> train-ner -> tag."""
    d = tmp_path_factory.mktemp("pipe")

    def run(*argv):
        assert main([str(a) for a in argv]) == 0, argv

    run("synth", "--output", d, "--sentences", 4000, "--train-size", 120,
        "--dev-size", 60, "--test-size", 80, "--seed", 1)
    run("prepare-dual", "--input", d / "distant.txt",
        "--inventory", d / "inventory.txt", "--output", d / "dual.txt")
    run("train-embed", "--input", d / "dual.txt", "--output", d / "vectors.vec",
        "--set", "embed.dim=24", "--set", "embed.epochs=3",
        "--set", "embed.learning_rate=0.05", "--set", "embed.subsample_threshold=1e-3",
        "--seed", 7)
    run("build-ls", "--embeddings", d / "vectors.vec",
        "--inventory", d / "inventory.txt", "--vocab", d / "vocab.txt",
        "--output", d / "table.lstb")
    run("train-ner", "--train", d / "train.txt", "--dev", d / "dev.txt",
        "--output", d / "model.ckpt", "--history", d / "history.tsv",
        "--embeddings", d / "vectors.vec", "--ls-table", d / "table.lstb",
        *TRAIN_FLAGS, "--set", "tagger.max_epochs=8",
        "--set", "tagger.patience=4", "--set", "tagger.seed=0")
    run("tag", "--checkpoint", d / "model.ckpt", "--input", d / "test.txt",
        "--output", d / "pred.txt", "--ls-table", d / "table.lstb")
    return d


class TestPipeline:
    def test_synth_corpus_shape(self, pipe):
        manifest = dict(
            ln.split(" = ")
            for ln in (pipe / "manifest.txt").read_text().splitlines()
            if " = " in ln
        )
        assert manifest["seed"] == "1"
        assert manifest["distant_sentences"] == "4000"
        assert float(manifest["test_oov_entity_token_rate"]) >= 0.30
        assert len(load_column_file(pipe / "train.txt")) == 120

    def test_eval_closes_the_loop(self, pipe, capsys):
        assert main(["eval", "--gold", str(pipe / "test.txt"),
                     "--pred", str(pipe / "pred.txt")]) == 0
        out = capsys.readouterr().out
        assert "FB1:" in out and "precision:" in out

    def test_eval_machine_output(self, pipe, capsys):
        assert main(["eval", "--gold", str(pipe / "test.txt"),
                     "--pred", str(pipe / "pred.txt"), "--machine"]) == 0
        pairs = dict(
            ln.split(" = ") for ln in capsys.readouterr().out.splitlines() if " = " in ln
        )
        assert 0.0 <= float(pairs["f1"]) <= 100.0
        assert int(pairs["gold_phrases"]) > 0

    def test_tagged_output_appends_column(self, pipe):
        gold = load_column_file(pipe / "test.txt")
        pred = load_column_file(pipe / "pred.txt")
        assert len(pred) == len(gold)
        for g, p in zip(gold, pred):
            assert [t.surface for t in p.tokens] == [t.surface for t in g.tokens]
            validate_tags(p.tags, TagScheme.BILOU)

    def test_predictions_match_library_tagging(self, pipe):
        ls = load_ls_table(pipe / "table.lstb")
        model = load_checkpoint(pipe / "model.ckpt", ls)
        sentences = load_column_file(pipe / "test.txt")
        assert model.tag_batch(sentences) == [s.tags for s in load_column_file(pipe / "pred.txt")]

    def test_history_log_layout(self, pipe):
        lines = (pipe / "history.tsv").read_text().splitlines()
        assert lines[0] == "# seed = 0"
        assert lines[1].startswith("# features = word_emb,char,cap,ls")
        assert lines[2] == "epoch\tloss\tdev_f1"
        rows = [ln.split("\t") for ln in lines[3:]]
        assert 1 <= len(rows) <= 8
        losses = [float(r[1]) for r in rows]
        assert losses[0] > losses[-1] > 0
        assert max(float(r[2]) for r in rows) > 0

    def test_inspect_prints_ranked_types(self, pipe, capsys):
        word = (pipe / "vocab.txt").read_text().split()[0]
        assert main(["inspect", "--embeddings", str(pipe / "vectors.vec"),
                     "--inventory", str(pipe / "inventory.txt"),
                     "--word", word, "-k", "3"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == f"# word = {word}"
        assert len(out) == 4
        assert [ln.split()[0] for ln in out[1:]] == ["1", "2", "3"]

    def test_inspect_k_beyond_inventory_is_data_error(self, pipe):
        assert main(["inspect", "--embeddings", str(pipe / "vectors.vec"),
                     "--inventory", str(pipe / "inventory.txt"),
                     "--word", "anything", "-k", "99"]) == 2

    def test_train_embed_byte_identical_reruns(self, pipe, tmp_path):
        argv = ["train-embed", "--input", str(pipe / "dual.txt"),
                "--set", "embed.dim=8", "--set", "embed.epochs=1", "--seed", "3"]
        assert main(argv + ["--output", str(tmp_path / "a.vec")]) == 0
        assert main(argv + ["--output", str(tmp_path / "b.vec")]) == 0
        assert (tmp_path / "a.vec").read_bytes() == (tmp_path / "b.vec").read_bytes()

    def test_synth_reruns_identical(self, pipe, tmp_path):
        for name in ("x", "y"):
            assert main(["synth", "--output", str(tmp_path / name),
                         "--sentences", "300", "--train-size", "40",
                         "--dev-size", "20", "--test-size", "20", "--seed", "5"]) == 0
        for f in ("distant.txt", "train.txt", "dev.txt", "test.txt", "vocab.txt"):
            assert (tmp_path / "x" / f).read_bytes() == (tmp_path / "y" / f).read_bytes()

    def test_tag_reads_untagged_input(self, pipe, tmp_path, capsys):
        plain = tmp_path / "plain.txt"
        words = [t.surface for t in load_column_file(pipe / "test.txt")[0].tokens]
        plain.write_text("".join(w + "\n" for w in words))
        assert main(["tag", "--checkpoint", str(pipe / "model.ckpt"),
                     "--input", str(plain), "--ls-table", str(pipe / "table.lstb")]) == 0
        out = [ln.split() for ln in capsys.readouterr().out.splitlines() if ln]
        assert [r[0] for r in out] == words
        assert all(r[1] == "O" and len(r) == 3 for r in out)


# ---------------------------------------------------------------------------
# ablate
# ---------------------------------------------------------------------------

class TestAblate:
    def test_combined_features_beat_each_alone(self, pipe, capsys):
        rc = main(["ablate", "--train", str(pipe / "train.txt"),
                   "--dev", str(pipe / "dev.txt"), "--test", str(pipe / "test.txt"),
                   "--feature-sets", "word_emb;ls;word_emb,ls", "--runs", "1",
                   "--embeddings", str(pipe / "vectors.vec"),
                   "--ls-table", str(pipe / "table.lstb"),
                   "--set", "tagger.word_hidden=16", "--set", "tagger.dropout_prob=0.15",
                   "--set", "tagger.max_epochs=16", "--set", "tagger.patience=16",
                   "--set", "tagger.seed=0"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# ablate: runs = 1, seeds = 0..0"
        assert lines[1] == "features\tmean_f1\tstdev\truns"
        rows = {r[0]: r for r in (ln.split("\t") for ln in lines[2:])}
        assert list(rows) == ["word_emb", "ls", "word_emb+ls"]
        means = {name: float(r[1]) for name, r in rows.items()}
        assert means["word_emb+ls"] > means["word_emb"]
        assert means["word_emb+ls"] > means["ls"]
        # one run per row: stdev is exactly zero
        assert all(r[2] == "0.00" for r in rows.values())

    def test_unknown_feature_is_usage_error(self, pipe, capsys):
        rc = main(["ablate", "--train", str(pipe / "train.txt"),
                   "--dev", str(pipe / "dev.txt"), "--test", str(pipe / "test.txt"),
                   "--feature-sets", "word_emb,bogus"])
        assert rc == 1
        assert "unknown feature" in capsys.readouterr().err

    def test_zero_runs_is_usage_error(self, pipe):
        assert main(["ablate", "--train", str(pipe / "train.txt"),
                     "--dev", str(pipe / "dev.txt"), "--test", str(pipe / "test.txt"),
                     "--feature-sets", "ls", "--runs", "0"]) == 1


# ---------------------------------------------------------------------------
# gradcheck and exit codes
# ---------------------------------------------------------------------------

class TestGradcheckCommand:
    def test_default_config_passes(self, capsys):
        assert main(["gradcheck"]) == 0
        out = capsys.readouterr().out
        assert out.strip().endswith("PASS")
        # one diagnostic row per parameter block
        assert sum(1 for ln in out.splitlines() if "\t" in ln) >= 10

    def test_corrupted_block_fails(self, capsys):
        assert main(["gradcheck", "--corrupt", "proj_w"]) == 3
        assert capsys.readouterr().out.strip().endswith("FAIL")

    def test_unknown_corrupt_block_is_data_error(self):
        assert main(["gradcheck", "--corrupt", "nonesuch"]) == 2


class TestExitCodes:
    def test_missing_required_flag(self, capsys):
        assert main(["tag", "--input", "x.txt"]) == 1
        assert "--checkpoint" in capsys.readouterr().err

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_missing_input_file(self, tmp_path):
        assert main(["eval", "--gold", str(tmp_path / "nope.txt"),
                     "--pred", str(tmp_path / "nope.txt")]) == 2

    def test_unknown_config_key_in_file(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("embed.widnow = 5\n")
        assert main(["train-embed", "--input", str(tmp_path / "in.txt"),
                     "--output", str(tmp_path / "out.vec"),
                     "--config", str(cfg)]) == 1
        assert "embed.widnow" in capsys.readouterr().err

    def test_mismatched_eval_files(self, tmp_path):
        gold = tmp_path / "gold.txt"
        gold.write_text("a O\n\nb O\n")
        pred = tmp_path / "pred.txt"
        pred.write_text("a O\n")
        assert main(["eval", "--gold", str(gold), "--pred", str(pred)]) == 2

    def test_output_into_missing_directory(self, pipe):
        assert main(["train-embed", "--input", str(pipe / "dual.txt"),
                     "--output", str(pipe / "no" / "dir" / "out.vec")]) == 2


class TestConfigPrecedence:
    def test_flags_override_file_and_seed_lands_in_artifacts(self, pipe, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("embed.dim = 12\nembed.epochs = 1\nseed = 5\n")
        out = tmp_path / "out.vec"
        assert main(["train-embed", "--input", str(pipe / "dual.txt"),
                     "--output", str(out), "--config", str(cfg),
                     "--set", "embed.dim=16"]) == 0
        table = load_embeddings(out)
        assert table.dim == 16  # flag beat the file
        assert table.seed == 5  # root seed from the file reached the artifact

    def test_seed_flag_overrides_file_seed(self, pipe, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("seed = 5\nembed.dim = 8\nembed.epochs = 1\n")
        out = tmp_path / "out.vec"
        assert main(["train-embed", "--input", str(pipe / "dual.txt"),
                     "--output", str(out), "--config", str(cfg), "--seed", "9"]) == 0
        assert load_embeddings(out).seed == 9
