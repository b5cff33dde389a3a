"""Tests for the HTTP API."""
import pytest

DESIGN = {
    "hyps": {"theta0": 0.0, "theta1": -0.8795},
    "thresholds": {"k0": 0.05, "k1": 20.0},
}
TRIAL = {"name": "demo", "theta1": -0.8795, "k0": 0.05, "k1": 20.0}


def create_trial(client, **overrides):
    response = client.post("/api/trials/", json={**TRIAL, **overrides})
    assert response.status_code == 201
    return response.json()["id"]


def add(client, trial_id, subject_id, time, event, group):
    return client.post(
        f"/api/trials/{trial_id}/records",
        json={"subject_id": subject_id, "time": time, "event": event, "group": group},
    )


class TestService:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json()["status"] == "healthy"

    def test_root(self, client):
        assert client.get("/").json()["docs"] == "/docs"


class TestDesign:
    def test_normal(self, client):
        response = client.post("/api/design/normal?event_probability=0.8", json=DESIGN)
        assert response.status_code == 200
        body = response.json()
        assert body["characteristics"]["alpha_l"] == pytest.approx(0.0373, abs=1e-4)
        assert body["subjects_null"] == 39

    def test_poisson_is_reoriented(self, client):
        payload = {"psi1": 0.415, "lambda_c": 0.25, "thresholds": DESIGN["thresholds"]}
        response = client.post("/api/design/poisson", json=payload)
        assert response.status_code == 200
        body = response.json()
        assert body["oriented_design"]["flipped"] is True
        assert len(body["projections"]) == 4

    def test_invalid_thresholds(self, client):
        payload = {**DESIGN, "thresholds": {"k0": 2.0, "k1": 20.0}}
        assert client.post("/api/design/normal", json=payload).status_code == 422


class TestTables:
    def test_table1(self, client):
        response = client.get("/api/tables/1")
        assert response.status_code == 200
        assert round(response.json()["cells"][0][0], 4) == 0.2342

    def test_table2(self, client):
        rows = client.get("/api/tables/2").json()["rows"]
        assert len(rows) == 7

    def test_unknown_table(self, client):
        response = client.get("/api/tables/7")
        assert response.status_code == 422
        assert response.json()["type"] == "DomainError"


class TestSimulate:
    def test_astray(self, client):
        payload = {"k": 20.0, "window": {"m0": 1, "m": 100}, "config": {"replicates": 200, "seed": 1}}
        response = client.post("/api/simulate/astray", json=payload)
        assert response.status_code == 200
        assert response.json()["replicates"] == 200

    def test_walk(self, client):
        payload = {"design": DESIGN, "config": {"replicates": 200, "seed": 2}}
        response = client.post("/api/simulate/walk", json=payload)
        assert response.status_code == 200
        body = response.json()
        total = body["prob_stop_efficacy"] + body["prob_stop_inefficacy"] + body["prob_non_stop"]
        assert total == pytest.approx(1.0)

    def test_astray_under_alternative_rejected(self, client):
        payload = {
            "k": 20.0,
            "window": {"m0": 1, "m": 100},
            "config": {"replicates": 10, "truth": 1},
        }
        response = client.post("/api/simulate/astray", json=payload)
        assert response.status_code == 422
        assert response.json()["type"] == "SimConfigError"


class TestTrials:
    def test_create_and_list(self, client):
        trial_id = create_trial(client)
        listed = client.get("/api/trials/").json()
        assert [t["id"] for t in listed] == [trial_id]
        assert client.get(f"/api/trials/{trial_id}").json()["n_records"] == 0

    def test_unknown_trial(self, client):
        assert client.get("/api/trials/999").status_code == 404

    def test_invalid_thresholds_rejected(self, client):
        response = client.post("/api/trials/", json={**TRIAL, "k0": 2.0})
        assert response.status_code == 422

    def test_record_flow(self, client):
        trial_id = create_trial(client)
        first = add(client, trial_id, "a", 1.0, 1, 1)
        assert first.status_code == 200
        assert first.json()["decision"]["d_events"] == 1

        second = add(client, trial_id, "b", 2.0, 1, 0).json()
        assert second["ingested"] == 1
        assert second["decision"]["lr"] == pytest.approx(0.5866, abs=1e-4)
        assert second["decision"]["verdict"] == "continue"

        again = add(client, trial_id, "a", 1.0, 1, 1).json()
        assert again["ingested"] == 0

        clash = add(client, trial_id, "a", 1.5, 1, 1)
        assert clash.status_code == 422
        assert clash.json()["type"] == "IngestionError"
        assert client.get(f"/api/trials/{trial_id}").json()["n_records"] == 2

        decision = client.get(f"/api/trials/{trial_id}/decision").json()
        assert decision["lr"] == pytest.approx(0.5866, abs=1e-4)

    def test_evidence_views(self, client):
        trial_id = create_trial(client)
        for subject_id, time, event, group in [("a", 1.0, 1, 1), ("b", 2.0, 1, 0), ("c", 3.0, 1, 1), ("d", 4.0, 1, 0)]:
            add(client, trial_id, subject_id, time, event, group)

        intervals = client.get(f"/api/trials/{trial_id}/intervals").json()
        assert intervals["theta_hat"] is not None
        assert [i["k_level"] for i in intervals["intervals"]] == [8.0, 32.0]

        scan = client.get(f"/api/trials/{trial_id}/posthoc", params={"k": 8}).json()
        assert scan["sup_lr"] == 1.0
        assert scan["astray"] is False

        projection = client.post(
            f"/api/trials/{trial_id}/projection", json={"k_target": 32, "remaining": 50}
        ).json()
        assert 0.0 <= projection["prob_under_null"] <= projection["prob_under_alt"] <= 1.0

        assert client.get(f"/api/trials/{trial_id}/posthoc", params={"k": 1}).status_code == 422

    def test_divergent_mle_has_no_intervals(self, client):
        trial_id = create_trial(client)
        add(client, trial_id, "a", 1.0, 1, 1)
        add(client, trial_id, "b", 2.0, 1, 0)
        intervals = client.get(f"/api/trials/{trial_id}/intervals").json()
        assert intervals == {"theta_hat": None, "intervals": []}

    def test_upload(self, client):
        trial_id = create_trial(client)
        content = b"subject_id,time,event,group\na,1.0,1,1\nb,2.0,1,0\nc,2.5,0,1\n"
        response = client.post(
            f"/api/trials/{trial_id}/upload", files={"file": ("events.csv", content, "text/csv")}
        )
        assert response.status_code == 200
        assert response.json()["ingested"] == 3
        assert response.json()["decision"]["d_events"] == 2

    def test_malformed_upload_stores_nothing(self, client):
        trial_id = create_trial(client)
        content = b"subject_id,time,event,group\na,1.0,1,1\nb,later,1,0\n"
        response = client.post(
            f"/api/trials/{trial_id}/upload", files={"file": ("events.csv", content, "text/csv")}
        )
        assert response.status_code == 422
        assert response.json()["row"] == 3
        assert client.get(f"/api/trials/{trial_id}").json()["n_records"] == 0
