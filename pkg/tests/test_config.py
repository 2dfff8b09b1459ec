import pytest

from iopredict.bench import BenchConfig, PipelineBenchConfig
from iopredict.config import ConfigError, expand_suite, load_config, parse_grid, parse_models, parse_targets


def write(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text)
    return p


def test_expand_order_and_counts(tmp_path):
    cfg = load_config(write(tmp_path, f"""
seed: 3
targets: [{{name: a, root_path: {tmp_path}}}]
sequential: {{block_kb: [4, 64, 1024, 4096], file_size_mb: [10, 100, 1000]}}
random: {{block_kb: 4, file_size_mb: 10, n_samples: [1000, 5000]}}
pipeline: {{batch_size: [16, 32], num_workers: [0, 1], n_batches: 3}}
"""))
    cells = expand_suite(cfg)
    assert len(cells) == 12 + 2 + 4
    assert [c.block_kb for c in cells[:3]] == [4, 4, 4]
    assert [c.file_size_mb for c in cells[:3]] == [10, 100, 1000]
    assert isinstance(cells[12], BenchConfig) and cells[12].pattern == "random"
    assert all(isinstance(c, PipelineBenchConfig) for c in cells[14:])
    assert all(c.seed == 3 for c in cells)
    assert expand_suite(cfg, seed=9)[0].seed == 9


def test_single_cell(tmp_path):
    cfg = {"targets": [{"name": "a", "root_path": str(tmp_path)}],
           "sequential": {"block_kb": 4, "file_size_mb": 1}}
    assert len(expand_suite(cfg)) == 1


@pytest.mark.parametrize("text,match", [
    ("- 1\n- 2\n", "mapping"),
    ("bogus: 1\n", "unknown section"),
    ("sequential: {block_kb: [4]}\n", "missing key"),
    ("sequential: {block_kb: [4], file_size_mb: [1], color: 2}\n", "unknown key"),
    ("sequential: {block_kb: [], file_size_mb: [1]}\n", "empty"),
    ("seed: 1\n", "no benchmark cells"),
    ("sequential: {block_kb: [0], file_size_mb: [1]}\n", "invalid"),
    ("a: [\n", "invalid YAML"),
])
def test_config_errors(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        expand_suite(load_config(write(tmp_path, text)))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "none.yaml")


def test_targets_models_and_grid(tmp_path):
    cfg = load_config(write(tmp_path, """
models:
  - gbdt
  - {kind: ridge, name: r10, hyperparameters: {alpha: 10.0}}
grid:
  tunable: {batch_size: [16, 32]}
  fixed: {block_kb: 0, file_size_mb: 0, n_samples: 0, throughput_mb_s: 1, iops: 0, n_threads: 0,
          samples_per_second: 1, data_loading_ratio: 0, num_workers: 1, aggregate_throughput_mb_s: 0}
"""))
    gbdt, ridge = parse_models(cfg)
    assert gbdt.kind == "gbdt" and ridge.name == "r10" and ridge.params["alpha"] == 10.0
    assert parse_grid(cfg).size == 2
    assert parse_targets({})[0].name == "default"
    with pytest.raises(ConfigError):
        parse_models({"models": [{"kind": "svm"}]})
    with pytest.raises(ConfigError):
        parse_grid({})
    with pytest.raises(ConfigError):
        parse_targets({"targets": [{"name": "x"}]})
