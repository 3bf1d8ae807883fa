from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from connectgen.server import create_app
from connectgen.study import (
    DuplicateSurveyError,
    EmptyPoolError,
    PairIncompleteError,
    StudyService,
    StudyStore,
    UnknownTokenError,
)

from study_fixtures import subtype_puzzle

AI_PUZZLE = subtype_puzzle("one_step", "sv")
NYT_PUZZLE = subtype_puzzle("published", "nv", source="nyt")
ALL_CATEGORIES = [g.category for g in AI_PUZZLE.groups + NYT_PUZZLE.groups]

SURVEY = {
    "english_proficiency": "native",
    "play_frequency": "weekly",
    "seen_before": False,
    "q_creative": "puzzle_1",
    "q_harder": "puzzle_2",
    "q_liked": "tie_neither",
    "free_text": {"liked": "fun decoys"},
    "username": "tester",
}


def make_service(tmp_path, seed=0, subdir="data"):
    return StudyService(
        [AI_PUZZLE], [NYT_PUZZLE], StudyStore(tmp_path / subdir), rng_seed=seed
    )


@pytest.fixture
def client(tmp_path):
    return TestClient(create_app(make_service(tmp_path)))


def _puzzle_for_slot(body, slot):
    ai_slot = "1" if body_board_order(body) == "ai_first" else "2"
    return AI_PUZZLE if slot == ai_slot else NYT_PUZZLE


def body_board_order(body) -> str:
    words = set(body["boards"]["1"]["words"])
    return "ai_first" if words == set(AI_PUZZLE.all_words()) else "nyt_first"


def _finish(client, token, slot, puzzle, solve=True):
    last = None
    if solve:
        for g in puzzle.groups:
            last = client.post(
                "/api/guess", json={"token": token, "slot": slot, "words": list(g.words)}
            )
    else:
        g0, g1 = puzzle.groups[0], puzzle.groups[1]
        for k in range(4):
            last = client.post(
                "/api/guess",
                json={"token": token, "slot": slot, "words": list(g0.words[:3] + (g1.words[k],))},
            )
    return last


class TestLifecycle:
    def test_health(self, client):
        assert client.get("/api/health").json() == {"status": "ok"}

    def test_pair_issues_two_playable_boards(self, client):
        body = client.post("/api/pair", json={}).json()
        assert set(body["boards"]) == {"1", "2"}
        for slot in ("1", "2"):
            view = body["boards"][slot]
            assert len(view["words"]) == 16
            assert view["mistakes_remaining"] == 4
            assert view["status"] == "in_progress"
            assert view["solved_groups"] == []
            assert view["solution"] is None

    def test_full_session_lifecycle(self, client):
        body = client.post("/api/pair", json={}).json()
        token = body["token"]
        order = body_board_order(body)
        first = AI_PUZZLE if order == "ai_first" else NYT_PUZZLE
        second = NYT_PUZZLE if order == "ai_first" else AI_PUZZLE

        survey_early = client.post("/api/survey", json={"token": token, **SURVEY})
        assert survey_early.status_code == 409  # pair incomplete

        resp = _finish(client, token, "1", first, solve=True).json()
        assert resp["status"] == "solved"
        assert resp["board"]["solution"] is not None

        resp = _finish(client, token, "2", second, solve=False).json()
        assert resp["status"] == "failed"
        solution_categories = {g["category"] for g in resp["board"]["solution"]}
        assert solution_categories == {g.category for g in second.groups}

        stored = client.post("/api/survey", json={"token": token, **SURVEY})
        assert stored.status_code == 200
        again = client.post("/api/survey", json={"token": token, **SURVEY})
        assert again.status_code == 409  # duplicate

    def test_guess_verdicts(self, client):
        body = client.post("/api/pair", json={}).json()
        token = body["token"]
        puzzle = AI_PUZZLE if body_board_order(body) == "ai_first" else NYT_PUZZLE
        g0, g1 = puzzle.groups[0], puzzle.groups[1]

        one_away = client.post(
            "/api/guess",
            json={"token": token, "slot": "1", "words": list(g0.words[:3] + (g1.words[0],))},
        ).json()
        assert one_away["verdict"] == "one_away"
        assert one_away["mistakes_remaining"] == 3
        assert one_away["revealed"] is None

        duplicate = client.post(
            "/api/guess",
            json={"token": token, "slot": "1", "words": list(g0.words[:3] + (g1.words[0],))},
        ).json()
        assert duplicate["verdict"] == "rejected_duplicate"
        assert duplicate["mistakes_remaining"] == 3

        correct = client.post(
            "/api/guess", json={"token": token, "slot": "1", "words": list(g0.words)}
        ).json()
        assert correct["verdict"] == "correct"
        assert correct["revealed"]["category"] == g0.category

        invalid = client.post(
            "/api/guess",
            json={"token": token, "slot": "1", "words": [g1.words[0], "zzz", "yyy", "xxx"]},
        ).json()
        assert invalid["verdict"] == "rejected_invalid"

    def test_board_endpoint_tracks_state(self, client):
        body = client.post("/api/pair", json={}).json()
        token = body["token"]
        puzzle = AI_PUZZLE if body_board_order(body) == "ai_first" else NYT_PUZZLE
        client.post(
            "/api/guess",
            json={"token": token, "slot": "1", "words": list(puzzle.groups[0].words)},
        )
        view = client.get(f"/api/board/1", params={"token": token}).json()
        assert len(view["words"]) == 12
        assert view["solved_groups"][0]["category"] == puzzle.groups[0].category

    def test_shuffle_preserves_words(self, client):
        body = client.post("/api/pair", json={}).json()
        token = body["token"]
        before = client.get("/api/board/1", params={"token": token}).json()["words"]
        after = client.post("/api/shuffle", json={"token": token, "slot": "1"}).json()["words"]
        assert sorted(before) == sorted(after)

    def test_unknown_token_and_slot(self, client):
        assert client.get("/api/board/1", params={"token": "nope"}).status_code == 404
        body = client.post("/api/pair", json={}).json()
        assert (
            client.get("/api/board/9", params={"token": body["token"]}).status_code == 404
        )

    def test_guess_after_terminal_is_conflict(self, client):
        body = client.post("/api/pair", json={}).json()
        token = body["token"]
        puzzle = AI_PUZZLE if body_board_order(body) == "ai_first" else NYT_PUZZLE
        _finish(client, token, "1", puzzle, solve=True)
        resp = client.post(
            "/api/guess",
            json={"token": token, "slot": "1", "words": list(puzzle.groups[0].words)},
        )
        assert resp.status_code == 409

    def test_wrong_arity_rejected_by_schema(self, client):
        body = client.post("/api/pair", json={}).json()
        resp = client.post(
            "/api/guess", json={"token": body["token"], "slot": "1", "words": ["a", "b"]}
        )
        assert resp.status_code == 422


class TestAntiLeak:
    def test_no_category_leak_before_reveal(self, client):
        payloads = []
        body = client.post("/api/pair", json={})
        payloads.append(body.text)
        token = body.json()["token"]
        for slot in ("1", "2"):
            payloads.append(client.get(f"/api/board/{slot}", params={"token": token}).text)
        puzzle = AI_PUZZLE if body_board_order(body.json()) == "ai_first" else NYT_PUZZLE
        wrong = list(puzzle.groups[0].words[:3] + (puzzle.groups[1].words[0],))
        payloads.append(
            client.post("/api/guess", json={"token": token, "slot": "1", "words": wrong}).text
        )
        payloads.append(client.post("/api/shuffle", json={"token": token, "slot": "1"}).text)
        for text in payloads:
            for category in ALL_CATEGORIES:
                assert category not in text
            assert "subtype" not in text
            assert '"source"' not in text

    def test_revealed_category_is_the_only_one_sent(self, client):
        body = client.post("/api/pair", json={}).json()
        token = body["token"]
        puzzle = AI_PUZZLE if body_board_order(body) == "ai_first" else NYT_PUZZLE
        resp = client.post(
            "/api/guess",
            json={"token": token, "slot": "1", "words": list(puzzle.groups[2].words)},
        )
        text = resp.text
        assert puzzle.groups[2].category in text
        for g in (puzzle.groups[0], puzzle.groups[1], puzzle.groups[3]):
            assert g.category not in text


class TestDeterminismAndSampling:
    def test_same_seed_same_pair_sequence(self, tmp_path):
        a = make_service(tmp_path, seed=99, subdir="a")
        b = make_service(tmp_path, seed=99, subdir="b")
        for _ in range(5):
            pa = a.issue_pair()
            pb = b.issue_pair()
            assert a._pairs[pa["token"]].slot_order == b._pairs[pb["token"]].slot_order
            assert a._pairs[pa["token"]].board_seeds == b._pairs[pb["token"]].board_seeds

    def test_slot_order_is_roughly_uniform(self, tmp_path):
        service = make_service(tmp_path, seed=123)
        orders = [service.issue_pair()["boards"]["1"]["words"][0][:2] for _ in range(1000)]
        ai_first = sum(1 for prefix in orders if prefix == "sv")
        assert 450 <= ai_first <= 550

    def test_empty_pool_rejected(self, tmp_path):
        service = StudyService([], [NYT_PUZZLE], StudyStore(tmp_path / "e"), rng_seed=0)
        with pytest.raises(EmptyPoolError):
            service.issue_pair()


class TestDurability:
    def test_state_survives_restart(self, tmp_path):
        service = make_service(tmp_path, seed=5)
        issued = service.issue_pair()
        token = issued["token"]
        puzzle = AI_PUZZLE if issued["boards"]["1"]["words"][0].startswith("sv") else NYT_PUZZLE
        service.post_guess(token, "1", puzzle.groups[0].words)
        service.post_shuffle(token, "1")
        before = service.board_view(token, "1")

        resumed = make_service(tmp_path, seed=5)
        after = resumed.board_view(token, "1")
        assert after == before

        # finish both boards and file the survey on the resumed instance
        other = NYT_PUZZLE if puzzle is AI_PUZZLE else AI_PUZZLE
        for g in puzzle.groups[1:]:
            resumed.post_guess(token, "1", g.words)
        for g in other.groups:
            resumed.post_guess(token, "2", g.words)
        resumed.post_survey(token, SURVEY)

        final = make_service(tmp_path, seed=5)
        assert final.board_view(token, "1")["status"] == "solved"
        with pytest.raises(DuplicateSurveyError):
            final.post_survey(token, SURVEY)

    def test_sessions_written_once_per_terminal_board(self, tmp_path):
        service = make_service(tmp_path, seed=5)
        issued = service.issue_pair()
        token = issued["token"]
        puzzle = AI_PUZZLE if issued["boards"]["1"]["words"][0].startswith("sv") else NYT_PUZZLE
        for g in puzzle.groups:
            service.post_guess(token, "1", g.words)
        make_service(tmp_path, seed=5)  # recovery must not duplicate the record
        make_service(tmp_path, seed=5)
        lines = (tmp_path / "data" / "sessions.jsonl").read_text().splitlines()
        records = [json.loads(l) for l in lines if l.strip()]
        assert len(records) == 1
        assert records[0]["session_id"] == f"{token}:1"
        assert records[0]["solved"] is True

    def test_survey_record_carries_pairing_snapshot(self, tmp_path):
        service = make_service(tmp_path, seed=5)
        issued = service.issue_pair()
        token = issued["token"]
        first = AI_PUZZLE if issued["boards"]["1"]["words"][0].startswith("sv") else NYT_PUZZLE
        second = NYT_PUZZLE if first is AI_PUZZLE else AI_PUZZLE
        for g in first.groups:
            service.post_guess(token, "1", g.words)
        for g in second.groups:
            service.post_guess(token, "2", g.words)
        service.post_survey(token, SURVEY)
        record = json.loads((tmp_path / "data" / "surveys.jsonl").read_text().splitlines()[0])
        assert record["pair_id"] == "pair-00001"
        assert record["slot_order"] in ("ai_first", "nyt_first")
        assert record["ai_puzzle_id"] == AI_PUZZLE.id
        assert record["q_liked"] == "tie_neither"
