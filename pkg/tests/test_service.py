import csv
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient

from askdag.bayesnet import forward_sample, load_fixture
from askdag.dataset import Dataset, read_csv_text
from askdag.graph import Change, ChangeKind, Dag
from askdag.knowledge import SimulatedExpert, truthful_verdict
from askdag.search import Criterion, SearchConfig, tabu_al
from askdag.service import create_app


def csv_text(dataset: Dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(dataset.names)
    for row in dataset.cells:
        writer.writerow([dataset.states[j][c] for j, c in enumerate(row)])
    return out.getvalue()


def pair_csv(rows=400, noise=0.1, seed=0) -> str:
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=rows)
    flip = rng.random(rows) < noise
    b = np.where(flip, 1 - a, a)
    cells = np.column_stack([a, b]).astype(np.int32)
    return csv_text(Dataset(["a", "b"], [["0", "1"], ["0", "1"]], cells))


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


def create_session(client, text, config=None, **extra):
    body = {"csv_text": text}
    if config is not None:
        body["config"] = config
    body.update(extra)
    response = client.post("/sessions", json=body)
    assert response.status_code == 201, response.text
    return response.json()


class TestCreate:
    def test_plain_run_comes_back_finished(self, client):
        view = create_session(client, pair_csv())
        assert view["status"] == "finished"
        assert view["pending"] is None
        assert view["requests_used"] == 0
        assert view["result"]["requests_used"] == 0
        assert view["result"]["arcs"] in (
            [{"from": "a", "to": "b"}],
            [{"from": "b", "to": "a"}],
        )
        assert isinstance(view["score"], float)
        assert view["variables"] == ["a", "b"]

    def test_recent_history_is_name_mapped(self, client):
        view = create_session(client, pair_csv())
        assert view["recent"]
        for entry in view["recent"]:
            assert entry["from"] in ("a", "b")
            assert entry["to"] in ("a", "b")

    def test_metrics_reported_against_truth(self, client):
        net = load_fixture("weather8")
        text = csv_text(forward_sample(net, 1500, seed=4))
        view = create_session(client, text, truth="weather8")
        assert view["status"] == "finished"
        assert 0.0 <= view["metrics"]["f1"] <= 1.0
        assert view["metrics"]["shd"] >= 0

    def test_budget_scales_with_variable_count(self, client):
        net = load_fixture("weather8")
        text = csv_text(forward_sample(net, 300, seed=4))
        view = create_session(
            client, text, config={"criterion": "none", "limit": 0.5}
        )
        assert view["budget"] == 4  # ceil(0.5 * 8)

    def test_ragged_csv_rejected(self, client):
        response = client.post("/sessions", json={"csv_text": "a,b\n0\n"})
        assert response.status_code == 422
        assert response.json()["code"] == "bad_dataset"

    def test_missing_csv_rejected(self, client):
        response = client.post("/sessions", json={})
        assert response.status_code == 422
        assert response.json()["code"] == "bad_dataset"

    def test_unknown_criterion_rejected(self, client):
        response = client.post(
            "/sessions",
            json={"csv_text": pair_csv(), "config": {"criterion": "magic"}},
        )
        assert response.status_code == 422
        assert response.json()["code"] == "bad_config"

    def test_unknown_truth_rejected(self, client):
        response = client.post(
            "/sessions", json={"csv_text": pair_csv(), "truth": "nonesuch99"}
        )
        assert response.status_code == 422
        assert response.json()["code"] == "bad_config"

    def test_constraints_with_unknown_column_rejected(self, client):
        response = client.post(
            "/sessions",
            json={
                "csv_text": pair_csv(),
                "constraints": {"reqd": [{"from": "a", "to": "zz"}], "stop": []},
            },
        )
        assert response.status_code == 422
        assert response.json()["code"] == "bad_config"

    def test_unknown_session_404(self, client):
        response = client.get("/sessions/doesnotexist")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_session"

    def test_listing_shows_sessions(self, client):
        view = create_session(client, pair_csv())
        listing = client.get("/sessions").json()["sessions"]
        assert {"id": view["id"], "status": "finished", "variables": 2} in listing


def awaiting_session(client, **config_extra):
    config = {"criterion": "equivalent-add"}
    config.update(config_extra)
    view = create_session(client, pair_csv(), config=config)
    assert view["status"] == "awaiting_answer"
    return view


class TestQuestionFlow:
    def test_first_question_is_the_equivalent_add(self, client):
        view = awaiting_session(client)
        pending = view["pending"]
        assert pending["question_id"] == 1
        assert pending["kind"] == "add"
        assert pending["iteration"] == 1
        assert {pending["from"], pending["to"]} == {"a", "b"}
        assert view["requests_used"] == 0

    def answer(self, client, sid, qid, verdict):
        return client.post(
            f"/sessions/{sid}/answer", json={"question_id": qid, "verdict": verdict}
        )

    def test_confirm_keeps_the_arc(self, client):
        view = awaiting_session(client)
        pending = view["pending"]
        done = self.answer(client, view["id"], 1, "confirm").json()
        assert done["status"] == "finished"
        assert done["requests_used"] == 1
        arc = {"from": pending["from"], "to": pending["to"]}
        assert arc in done["result"]["arcs"]
        assert done["result"]["constraints"]["reqd"] == [arc]
        assert done["result"]["constraints"]["stop"] == []

    def test_opposite_reverses_the_arc(self, client):
        view = awaiting_session(client)
        pending = view["pending"]
        done = self.answer(client, view["id"], 1, "opposite").json()
        assert done["status"] == "finished"
        flipped = {"from": pending["to"], "to": pending["from"]}
        assert flipped in done["result"]["arcs"]
        assert {"from": pending["from"], "to": pending["to"]} not in done["result"]["arcs"]
        assert done["result"]["constraints"]["reqd"] == [flipped]
        assert done["result"]["constraints"]["stop"] == [
            {"from": pending["from"], "to": pending["to"]}
        ]

    def test_absent_keeps_the_pair_unlinked(self, client):
        view = awaiting_session(client)
        done = self.answer(client, view["id"], 1, "absent").json()
        assert done["status"] == "finished"
        assert done["result"]["arcs"] == []
        assert len(done["result"]["constraints"]["stop"]) == 2

    def test_duplicate_same_verdict_is_idempotent(self, client):
        view = awaiting_session(client)
        first = self.answer(client, view["id"], 1, "confirm")
        again = self.answer(client, view["id"], 1, "confirm")
        assert first.status_code == again.status_code == 200
        assert again.json()["status"] == "finished"

    def test_duplicate_different_verdict_conflicts(self, client):
        view = awaiting_session(client)
        self.answer(client, view["id"], 1, "confirm")
        clash = self.answer(client, view["id"], 1, "absent")
        assert clash.status_code == 409
        assert clash.json()["code"] == "verdict_conflict"

    def test_unasked_question_is_stale(self, client):
        view = awaiting_session(client)
        response = self.answer(client, view["id"], 99, "confirm")
        assert response.status_code == 409
        assert response.json()["code"] == "stale_question"

    def test_bad_verdict_payloads_rejected(self, client):
        view = awaiting_session(client)
        response = self.answer(client, view["id"], 1, "maybe")
        assert response.status_code == 422
        assert response.json()["code"] == "bad_verdict"
        response = client.post(f"/sessions/{view['id']}/answer", json={"verdict": "confirm"})
        assert response.status_code == 422

    def test_absent_rejected_in_orientation_only_session(self, client):
        view = awaiting_session(client, orientation_only=True)
        response = self.answer(client, view["id"], 1, "absent")
        assert response.status_code == 422
        assert response.json()["code"] == "bad_verdict"
        done = self.answer(client, view["id"], 1, "confirm").json()
        assert done["status"] == "finished"


class TestCancel:
    def test_cancel_awaiting_returns_best_so_far(self, client):
        view = awaiting_session(client)
        done = client.post(f"/sessions/{view['id']}/cancel").json()
        assert done["status"] == "finished"
        assert done["pending"] is None
        assert done["result"] is not None
        assert done["result"]["constraints"] == {"reqd": [], "stop": []}

    def test_cancel_finished_is_a_noop(self, client):
        view = create_session(client, pair_csv())
        done = client.post(f"/sessions/{view['id']}/cancel").json()
        assert done["status"] == "finished"
        assert done["result"] == view["result"]


class TestCrossOrigin:
    def test_responses_allow_any_origin(self, client):
        resp = client.get("/sessions", headers={"Origin": "http://localhost:5173"})
        assert resp.status_code == 200
        assert resp.headers["access-control-allow-origin"] == "*"


class TestSessionLimit:
    def test_active_sessions_are_capped(self):
        with TestClient(create_app(max_sessions=1)) as client:
            first = create_session(
                client, pair_csv(), config={"criterion": "equivalent-add"}
            )
            assert first["status"] == "awaiting_answer"
            response = client.post("/sessions", json={"csv_text": pair_csv()})
            assert response.status_code == 429
            assert response.json()["code"] == "session_limit"
            client.post(f"/sessions/{first['id']}/cancel")
            second = create_session(client, pair_csv())
            assert second["status"] == "finished"


class TestConstraintHandoff:
    def test_exported_constraints_steer_a_new_session(self, client):
        view = awaiting_session(client)
        done = client.post(
            f"/sessions/{view['id']}/answer",
            json={"question_id": 1, "verdict": "opposite"},
        ).json()
        exported = done["result"]["constraints"]
        replay = create_session(client, pair_csv(), constraints=exported)
        assert replay["status"] == "finished"
        assert replay["result"]["arcs"] == done["result"]["arcs"]

    def test_preloaded_stop_arc_requires_no_question(self, client):
        constraints = {"reqd": [], "stop": [{"from": "a", "to": "b"}]}
        view = create_session(
            client,
            pair_csv(),
            config={"criterion": "equivalent-add"},
            constraints=constraints,
        )
        # the opposite orientation is prohibited, so the doubt criterion
        # stays quiet and the run completes unattended
        assert view["status"] == "finished"
        assert view["requests_used"] == 0
        assert view["result"]["arcs"] == [{"from": "b", "to": "a"}]


class TestScriptedReplication:
    def test_interactive_truthful_answers_match_simulated_expert(self, client):
        net = load_fixture("weather8")
        text = csv_text(forward_sample(net, 2000, seed=11))
        dataset = read_csv_text(text)
        index = {name: i for i, name in enumerate(dataset.names)}
        names = net.names()
        truth = Dag(
            net.n, [(index[names[a]], index[names[b]]) for a, b in net.dag.arcs()]
        )

        config = SearchConfig(criterion=Criterion.EQUIVALENT_ADD)
        oracle = SimulatedExpert(truth, expertise=1.0, seed=0)
        local = tabu_al(dataset, config, oracle=oracle)
        expected = [
            {"from": dataset.names[a], "to": dataset.names[b]}
            for a, b in sorted(local.dag.arcs())
        ]

        view = create_session(
            client, text, config={"criterion": "equivalent-add"}
        )
        answered = 0
        for _ in range(10_000):
            if view["status"] == "running":  # worker is between questions
                view = client.get(f"/sessions/{view['id']}").json()
                continue
            if view["status"] != "awaiting_answer":
                break
            pending = view["pending"]
            change = Change(
                ChangeKind(pending["kind"]),
                (index[pending["from"]], index[pending["to"]]),
            )
            verdict = truthful_verdict(truth, change)
            view = client.post(
                f"/sessions/{view['id']}/answer",
                json={"question_id": pending["question_id"], "verdict": verdict.value},
            ).json()
            answered += 1
            assert answered < 200
        assert view["status"] == "finished"
        assert view["result"]["arcs"] == expected
        assert view["requests_used"] == local.trace.request_total == answered
