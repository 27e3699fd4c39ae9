"""Wire-contract tests for the model server.

The schemas come from the client package's shipped wire.json (loaded by
file path: the schema file, not the library, is the shared interface).
Recorded request/response pairs for all four endpoints are validated
against those schemas, plus live checks of status codes, class order,
determinism, and the probability simplex.
"""

import json
import math
from pathlib import Path

import jsonschema
import pytest
from fastapi.testclient import TestClient

from model_server import ServerConfig, create_app

REPO_ROOT = Path(__file__).resolve().parents[2]
WIRE_SCHEMA_PATH = REPO_ROOT / "src" / "semfoil" / "schemas" / "wire.json"
RECORDED_PAIRS_PATH = Path(__file__).parent / "data" / "recorded_pairs.json"


@pytest.fixture(scope="module")
def schema():
    return json.loads(WIRE_SCHEMA_PATH.read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def validate(schema, name, payload):
    jsonschema.validate(payload, {**schema, "$ref": f"#/$defs/{name}"})


class TestRecordedPairs:
    """One recorded request/response pair per endpoint validates against
    the same schemas the client's fixtures use."""

    def test_recorded_exchanges_cover_all_endpoints(self):
        exchanges = json.loads(RECORDED_PAIRS_PATH.read_text(encoding="utf-8"))
        assert {e["endpoint"] for e in exchanges} == {
            "parse",
            "generate",
            "nli",
            "embed",
        }

    def test_recorded_exchanges_validate(self, schema):
        for exchange in json.loads(RECORDED_PAIRS_PATH.read_text(encoding="utf-8")):
            endpoint = exchange["endpoint"]
            validate(schema, f"{endpoint}_request", exchange["request"])
            validate(schema, f"{endpoint}_response", exchange["response"])

    def test_recorded_responses_still_current(self, schema, client):
        # the stub is deterministic, so the recording replays bit-exact
        for exchange in json.loads(RECORDED_PAIRS_PATH.read_text(encoding="utf-8")):
            response = client.post(f"/{exchange['endpoint']}", json=exchange["request"])
            assert response.status_code == 200
            assert response.json() == exchange["response"]


class TestEndpoints:
    def test_parse_shapes(self, schema, client):
        body = {"sentences": ["The snake bites the tiger."]}
        validate(schema, "parse_request", body)
        response = client.post("/parse", json=body)
        assert response.status_code == 200
        validate(schema, "parse_response", response.json())
        assert len(response.json()["graphs"]) == 1

    def test_generate_shapes(self, schema, client):
        body = {"graphs": ["(s / snake\n    :op1 (b / bite))"]}
        validate(schema, "generate_request", body)
        response = client.post("/generate", json=body)
        assert response.status_code == 200
        validate(schema, "generate_response", response.json())

    def test_nli_shapes_and_simplex(self, schema, client):
        body = {"pairs": [["a cat sat", "a cat sat"], ["a cat sat", "no cat sat"]]}
        response = client.post("/nli", json=body)
        assert response.status_code == 200
        validate(schema, "nli_response", response.json())
        for probs in response.json()["probs"]:
            assert math.isclose(sum(probs), 1.0, abs_tol=1e-6)
            assert all(p >= 0 for p in probs)

    def test_embed_two_texts_two_equal_length_vectors(self, schema, client):
        body = {"texts": ["one sentence", "another sentence"], "model": "stub"}
        validate(schema, "embed_request", body)
        response = client.post("/embed", json=body)
        assert response.status_code == 200
        validate(schema, "embed_response", response.json())
        vectors = response.json()["vectors"]
        assert len(vectors) == 2
        assert len({len(v) for v in vectors}) == 1

    def test_healthz_inventory(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        models = response.json()["models"]
        assert models["parser"] == "stub"
        assert models["embedders"] == ["stub"]


class TestNliSemantics:
    def test_class_order_contradiction_first(self, client):
        # a negation mismatch must put the mass on index 0
        response = client.post(
            "/nli",
            json={"pairs": [["the snake bites", "the snake does not bite"]]},
        )
        probs = response.json()["probs"][0]
        assert probs.index(max(probs)) == 0

    def test_identical_sentences_entail(self, client):
        response = client.post(
            "/nli", json={"pairs": [["same new text", "same new text"]]}
        )
        probs = response.json()["probs"][0]
        assert probs.index(max(probs)) == 2

    def test_low_overlap_is_neutral(self, client):
        response = client.post(
            "/nli", json={"pairs": [["alpha beta gamma", "delta epsilon zeta"]]}
        )
        probs = response.json()["probs"][0]
        assert probs.index(max(probs)) == 1


class TestDeterminism:
    def test_identical_requests_identical_responses(self, client):
        body = {"texts": ["determinism check"], "model": "stub"}
        first = client.post("/embed", json=body).json()
        second = client.post("/embed", json=body).json()
        assert first == second

    def test_parse_generate_round_trip(self, client):
        sentence = "The quick brown fox jumps over a lazy dog."
        graph = client.post("/parse", json={"sentences": [sentence]}).json()["graphs"][0]
        rebuilt = client.post("/generate", json={"graphs": [graph]}).json()[
            "sentences"
        ][0]
        assert rebuilt.lower().rstrip(".") == sentence.lower().rstrip(".")

    def test_polarity_realized_wherever_the_attribute_sits(self, client):
        # canonical serializers may emit :polarity - after the child edges
        variants = [
            "(t / the :polarity - :op1 (m / man))",
            "(t / the :op1 (m / man) :polarity -)",
        ]
        response = client.post("/generate", json={"graphs": variants})
        first, second = response.json()["sentences"]
        assert first == second == "Not the man."


class TestErrorCodes:
    def test_malformed_request_is_400(self, client):
        assert client.post("/parse", json={"wrong": []}).status_code == 400
        assert client.post("/nli", json={"pairs": "not-a-list"}).status_code == 400
        assert client.post("/embed", json={"texts": ["x"]}).status_code == 400

    def test_empty_sentence_is_400(self, client):
        assert (
            client.post("/parse", json={"sentences": ["   "]}).status_code == 400
        )

    def test_invalid_graph_is_422(self, client):
        response = client.post("/generate", json={"graphs": ["(broken"]})
        assert response.status_code == 422
        response = client.post("/generate", json={"graphs": ["no parens"]})
        assert response.status_code == 422

    def test_unloaded_model_is_503(self):
        config = ServerConfig(parser_model=None, nli_model=None)
        client = TestClient(create_app(config))
        assert (
            client.post("/parse", json={"sentences": ["x"]}).status_code == 503
        )
        assert (
            client.post("/nli", json={"pairs": [["a", "b"]]}).status_code == 503
        )

    def test_unknown_embed_model_is_503(self, client):
        response = client.post(
            "/embed", json={"texts": ["x"], "model": "never-configured"}
        )
        assert response.status_code == 503

    def test_batch_too_large_is_400(self):
        config = ServerConfig(max_batch_size=2)
        client = TestClient(create_app(config))
        response = client.post(
            "/parse", json={"sentences": ["a", "b", "c"]}
        )
        assert response.status_code == 400


class TestConfig:
    def test_unknown_keys_rejected(self):
        with pytest.raises(Exception):
            ServerConfig.model_validate({"parser": "x"})

    def test_load_with_overrides(self, tmp_path):
        path = tmp_path / "server.json"
        path.write_text('{"max_batch_size": 16, "port": 9000}')
        config = ServerConfig.load(path, port=9100)
        assert config.max_batch_size == 16
        assert config.port == 9100

    def test_bad_batch_size_rejected(self):
        with pytest.raises(Exception):
            ServerConfig(max_batch_size=0)
