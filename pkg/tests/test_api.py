import io
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor

from fastapi.testclient import TestClient

from app.main import create_app
from app.services.feed_parser import FeedParser


def write(client, key, **fields):
    return client.post("/update", data={"api_key": key, **fields})


class TestAPI:

    def test_health_check(self, client):
        """Test health check endpoint"""
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json()["status"] == "healthy"

    def test_create_and_get_channel(self, client, channel):
        """Test creating a channel and reading its metadata"""
        assert channel["field_labels"] == ["Turbidity", "Temperature", "PH", "Depth"]
        assert channel["write_key"]

        response = client.get(f"/channels/{channel['id']}")
        assert response.status_code == 200
        assert "write_key" not in response.json()

        listed = client.get("/channels").json()
        assert [c["id"] for c in listed] == [channel["id"]]

    def test_create_channel_too_many_labels(self, client):
        """Test a channel with nine labels is rejected"""
        response = client.post(
            "/channels", json={"name": "x", "field_labels": [f"f{i}" for i in range(9)]}
        )
        assert response.status_code == 422

    def test_update_returns_entry_id(self, client, channel):
        """Test writes answer the new entry id as text"""
        first = write(client, channel["write_key"], field1="3.56", field3="7.67")
        assert first.status_code == 200
        assert first.text == "1"

        second = client.get(
            "/update", params={"api_key": channel["write_key"], "field2": "17.62"}
        )
        assert second.text == "2"

    def test_update_failures_answer_zero(self, client, channel):
        """Test failed writes answer "0" with a 4xx status"""
        wrong_key = write(client, "WRONG", field1="1")
        assert wrong_key.status_code == 401
        assert wrong_key.text == "0"

        missing_key = client.post("/update", data={"field1": "1"})
        assert missing_key.status_code == 401
        assert missing_key.text == "0"

        no_fields = write(client, channel["write_key"])
        assert no_fields.status_code == 400
        assert no_fields.text == "0"

        not_a_number = write(client, channel["write_key"], field1="abc")
        assert not_a_number.status_code == 400
        assert not_a_number.text == "0"

    def test_created_at_is_kept(self, client, channel):
        """Test an explicit created_at is stored to the second"""
        write(client, channel["write_key"], field1="3.56", created_at="2020-12-20T20:50:00Z")
        response = client.get(f"/channels/{channel['id']}/feeds.csv")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/csv")
        assert response.text.splitlines()[1] == "2020-12-20T20:50:00Z,1,3.56,,,"

    def test_feed_formats_agree(self, client, channel):
        """Test CSV, JSON and XML exports carry the same entries"""
        for i in range(5):
            write(client, channel["write_key"], field1=str(3.5 + i / 100), field4=str(1 + i / 4))
        base = f"/channels/{channel['id']}/feeds"

        from_csv = FeedParser.read_csv(io.StringIO(client.get(f"{base}.csv").text))
        from_json = FeedParser.read_json(client.get(f"{base}.json").text)
        xml = client.get(f"{base}.xml")
        assert xml.headers["content-type"].startswith("application/xml")
        from_xml = FeedParser.read_xml(xml.content, [1, 2, 3, 4])
        assert len(from_csv) == 5
        assert from_csv == from_json == from_xml
        assert ET.fromstring(xml.content).findtext("name") == "Fish Farm Monitoring System"

    def test_results_and_field_routes(self, client, channel):
        """Test tail limits and single-field export"""
        for value in ("7.67", "8.39", "8.24"):
            write(client, channel["write_key"], field3=value)
        tail = client.get(f"/channels/{channel['id']}/feeds.json", params={"results": 1}).json()
        assert [row["entry_id"] for row in tail["feeds"]] == [3]

        field = client.get(f"/channels/{channel['id']}/fields/3.json").json()
        assert set(field["feeds"][0]) == {"created_at", "entry_id", "field3"}
        assert [row["field3"] for row in field["feeds"]] == [7.67, 8.39, 8.24]

        last = client.get(f"/channels/{channel['id']}/feeds/last.json").json()
        assert last["entry_id"] == 3

    def test_bad_requests(self, client, channel):
        """Test unknown channels, fields and formats"""
        assert client.get("/channels/99").status_code == 404
        assert client.get("/channels/99/feeds.csv").status_code == 404
        assert client.get(f"/channels/{channel['id']}/feeds.yaml").status_code == 400
        assert client.get(f"/channels/{channel['id']}/fields/6.csv").status_code == 400

    def test_empty_feed_csv(self, client, channel):
        """Test an empty channel exports just the header"""
        response = client.get(f"/channels/{channel['id']}/feeds.csv")
        assert response.text == "created_at,entry_id,field1,field2,field3,field4\n"

    def test_restart_keeps_entries(self, settings, client, channel):
        """Test writes survive a restart of the service"""
        for i in range(100):
            write(client, channel["write_key"], field1=str(i))

        with TestClient(create_app(settings)) as restarted:
            feed = restarted.get(
                f"/channels/{channel['id']}/feeds.json", params={"results": 8000}
            ).json()
        assert [row["entry_id"] for row in feed["feeds"]] == list(range(1, 101))
        assert feed["channel"]["last_entry_id"] == 100

    def test_concurrent_writes_export_dense_ids(self, client, channel):
        """Test 100 concurrent /update calls give ids 1..100 in every export format"""
        with ThreadPoolExecutor(max_workers=8) as pool:
            answers = list(
                pool.map(lambda i: write(client, channel["write_key"], field1=str(i)), range(100))
            )
        assert all(answer.status_code == 200 for answer in answers)
        assert sorted(int(answer.text) for answer in answers) == list(range(1, 101))

        base = f"/channels/{channel['id']}/feeds"
        params = {"results": 8000}
        from_csv = FeedParser.read_csv(io.StringIO(client.get(f"{base}.csv", params=params).text))
        from_json = FeedParser.read_json(client.get(f"{base}.json", params=params).text)
        from_xml = FeedParser.read_xml(
            client.get(f"{base}.xml", params=params).content, [1, 2, 3, 4]
        )
        assert [e.entry_id for e in from_csv] == list(range(1, 101))
        assert from_csv == from_json == from_xml
        assert sorted(e.field_values[1] for e in from_csv) == [float(i) for i in range(100)]
