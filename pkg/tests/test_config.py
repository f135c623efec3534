import json

import pytest

from shoal.config import (ConfigError, generate_jobs, load_config, parse_config,
                          task_length)


def minimal_doc(**overrides):
    doc = {
        "grid": {
            "users": [{"name": "u", "jobs": 1}],
            "resources": [{"name": "r", "policy": "space_shared",
                           "machines": [{"pes": [{"rating": 100}]}]}],
        },
    }
    doc.update(overrides)
    return doc


class TestParse:
    def test_minimal_defaults(self):
        config = parse_config(minimal_doc())
        assert config.mode == "optimizer"
        assert config.seed == 0
        assert config.swarm.population == 20
        assert config.grid.job_template.length_mi == 1000.0
        assert config.scheduling.dispatch_epsilon == 1.0
        assert config.dispatcher is None

    def test_resource_and_user_ids_assigned_in_order(self):
        doc = minimal_doc()
        doc["grid"]["users"].append({"name": "v", "jobs": 2})
        doc["grid"]["resources"].append({"name": "s", "policy": "time_shared",
                                         "machines": [{"pes": [{"rating": 50}]}]})
        config = parse_config(doc)
        assert [u.id for u in config.grid.users] == ["u0", "u1"]
        assert [r.id for r in config.grid.resources] == ["r0", "r1"]
        assert config.grid.resources[1].policy == "time_shared"

    def test_delta_out_of_range_diagnostic(self):
        doc = minimal_doc(swarm={"delta": 1.5})
        with pytest.raises(ConfigError, match=r"delta out of \(0,1\)"):
            parse_config(doc)

    def test_multiple_errors_collected_with_paths(self):
        doc = {
            "mode": "sideways",
            "swarm": {"visual": -1},
            "grid": {"resources": [{"name": "r", "machines": [{"pes": [{"rating": 0}]}]}]},
        }
        with pytest.raises(ConfigError) as err:
            parse_config(doc)
        text = str(err.value)
        assert "mode:" in text
        assert "swarm.visual:" in text
        assert "grid.resources[0].machines[0].pes[0].rating:" in text

    def test_unknown_keys_rejected(self):
        doc = minimal_doc(extra=1)
        with pytest.raises(ConfigError, match="extra: unknown field"):
            parse_config(doc)

    def test_seed_override_and_swarm_seed_priority(self):
        assert parse_config(minimal_doc(seed=5)).seed == 5
        assert parse_config(minimal_doc(seed=5), seed_override=9).seed == 9
        doc = minimal_doc(seed=5)
        doc["swarm"] = {"seed": 2}
        assert parse_config(doc).seed == 2

    def test_plane_position_parsed(self):
        doc = minimal_doc()
        doc["grid"]["resources"][0]["plane_position"] = [7, 5]
        config = parse_config(doc)
        assert config.grid.resources[0].plane_position == (7, 5)

    def test_template_exclusive_options(self):
        doc = minimal_doc()
        doc["grid"]["job_template"] = {"length_mi": 10, "length_range": [1, 2]}
        with pytest.raises(ConfigError, match="mutually exclusive"):
            parse_config(doc)

    def test_load_config_reports_json_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid JSON at line 1"):
            load_config(path)

    def test_load_config_round_trip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(minimal_doc(seed=4)), encoding="utf-8")
        assert load_config(path).seed == 4


class TestJobs:
    def test_constant_template_lengths(self):
        config = parse_config(minimal_doc())
        jobs = generate_jobs(config.grid, seed=1)
        assert [job.id for job in jobs] == ["u0-j000"]
        assert jobs[0].length == 1000.0

    def test_range_template_deterministic(self):
        doc = minimal_doc()
        doc["grid"]["users"] = [{"name": "u", "jobs": 5}]
        doc["grid"]["job_template"] = {"length_range": [100, 1000]}
        config = parse_config(doc)
        a = [job.length for job in generate_jobs(config.grid, seed=3)]
        b = [job.length for job in generate_jobs(config.grid, seed=3)]
        c = [job.length for job in generate_jobs(config.grid, seed=4)]
        assert a == b
        assert a != c
        assert all(100 <= v <= 1000 for v in a)

    def test_task_length_deterministic_per_counter(self):
        config = parse_config(minimal_doc())
        template = config.grid.job_template
        assert task_length(template, 1, 0) == 1000.0
        doc = minimal_doc()
        doc["grid"]["job_template"] = {"length_range": [100, 200]}
        ranged = parse_config(doc).grid.job_template
        assert task_length(ranged, 1, 0) == task_length(ranged, 1, 0)
        assert task_length(ranged, 1, 0) != task_length(ranged, 1, 1)
