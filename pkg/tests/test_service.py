import json
import socket
import urllib.request

import pytest

from skelforge.service import PROTOCOL_VERSION, Session, data_directory, serve


@pytest.fixture
def running_service(tmp_path):
    handle = serve(0, str(tmp_path))
    yield handle
    handle.stop()


class Client:
    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=10)
        self.file = self.sock.makefile("rw")
        self.next_id = 0

    def request(self, kind, **payload):
        self.next_id += 1
        msg = {"proto": PROTOCOL_VERSION, "id": self.next_id, "kind": kind}
        msg.update(payload)
        self.file.write(json.dumps(msg) + "\n")
        self.file.flush()
        reply = json.loads(self.file.readline())
        assert reply["id"] == self.next_id
        return reply

    def close(self):
        self.sock.close()


RECT = [[0, 0], [400, 0], [400, 100], [0, 100]]
LIMB = [[150, 60], [190, 60], [190, 260], [150, 260]]


def test_create_part_returns_delta(running_service):
    c = Client(running_service.tcp_port)
    r = c.request("CreatePart", polygon=RECT)
    assert r["status"] == "OK"
    assert r["delta"]["counts"]["parts"] == 1
    assert r["delta"]["counts"]["joints"] >= 1
    assert r["delta"]["parts"][0]["skeleton"]["joints"]
    assert set(r["timing_us"]) >= {"t_sskel", "t_boundeddp", "t_total"}
    c.close()


def test_self_intersecting_stroke_error(running_service):
    c = Client(running_service.tcp_port)
    t = [[100 * __import__("math").sin(a), 60 * __import__("math").sin(2 * a)]
         for a in [i * 0.01 for i in range(628)]]
    r = c.request("CreatePart", stroke={"points": t, "closed": True})
    assert r["status"] == "ERROR"
    assert r["error"]["code"] == "SelfIntersecting"
    c.close()


def test_set_config_rerefines(running_service):
    c = Client(running_service.tcp_port)
    c.request("CreatePart", polygon=RECT)
    c.request("CreatePart", polygon=LIMB)
    before = c.request("GetScene")["delta"]["counts"]
    r = c.request("SetConfig", config={"eps_c": 200.0})
    assert r["status"] == "OK"
    after = c.request("GetScene")["delta"]["counts"]
    assert after["joints"] <= before["joints"]
    c.close()


def test_scope_message(running_service):
    c = Client(running_service.tcp_port)
    c.request("CreatePart", polygon=RECT)
    r = c.request("SetScope", scope={"level": "subpart", "target": 0})
    assert r["status"] == "OK"
    assert r["delta"]["scope"] == {"level": "subpart", "target": 0}
    c.close()


def test_save_load_roundtrip(running_service, tmp_path):
    c = Client(running_service.tcp_port)
    c.request("CreatePart", polygon=RECT)
    c.request("CreatePart", polygon=LIMB)
    saved = c.request("SaveScene", name="demo")
    assert saved["status"] == "OK"
    c2 = Client(running_service.tcp_port)
    r = c2.request("LoadScene", name="demo")
    assert r["status"] == "OK"
    assert r["delta"]["counts"]["parts"] == 2
    c.close()
    c2.close()


def test_http_save_load(running_service, tmp_path):
    c = Client(running_service.tcp_port)
    c.request("CreatePart", polygon=RECT)
    c.request("SaveScene", name="web")
    url = f"http://127.0.0.1:{running_service.http_port}/scenes/web"
    body = urllib.request.urlopen(url).read()
    doc = json.loads(body)
    assert doc["version"] == "skelforge/1"
    req = urllib.request.Request(url.replace("web", "copy"), data=body, method="PUT")
    assert urllib.request.urlopen(req).status == 200
    r = c.request("LoadScene", name="copy")
    assert r["status"] == "OK"
    c.close()


def test_replay_is_byte_identical(tmp_path):
    log = [
        {"proto": PROTOCOL_VERSION, "id": 1, "kind": "CreatePart", "polygon": RECT},
        {"proto": PROTOCOL_VERSION, "id": 2, "kind": "CreatePart", "polygon": LIMB},
        {"proto": PROTOCOL_VERSION, "id": 3, "kind": "SetConfig",
         "config": {"eps_m": 45.0}},
        {"proto": PROTOCOL_VERSION, "id": 4, "kind": "MovePart", "part": 1,
         "transform": {"tx": 30.0, "ty": -10.0, "rot": 0.2, "scale": 1.1}},
    ]
    docs = []
    for _ in range(2):
        session = Session(data_directory(str(tmp_path)))
        for msg in log:
            reply = session.handle(dict(msg))
            assert reply["status"] == "OK"
        docs.append(session.scene.save())
    assert docs[0] == docs[1]


def test_timing_sum_close_to_total(running_service):
    c = Client(running_service.tcp_port)
    r = c.request("CreatePart", polygon=RECT)
    t = r["timing_us"]
    stage_sum = sum(v for k, v in t.items() if k != "t_total")
    assert stage_sum <= t["t_total"] * 1.05
    c.close()


def test_bad_message_kinds(running_service):
    c = Client(running_service.tcp_port)
    r = c.request("Nonsense")
    assert r["status"] == "ERROR" and r["error"]["code"] == "BadRequest"
    c.file.write("not json at all\n")
    c.file.flush()
    r = json.loads(c.file.readline())
    assert r["status"] == "ERROR"
    c.close()


def test_websocket_round_trip(running_service):
    import base64
    import hashlib
    import os
    import struct

    sock = socket.create_connection(("127.0.0.1", running_service.http_port),
                                    timeout=10)
    key = base64.b64encode(os.urandom(16)).decode()
    sock.sendall((
        "GET /session HTTP/1.1\r\n"
        f"Host: 127.0.0.1:{running_service.http_port}\r\n"
        "Upgrade: websocket\r\nConnection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
    ).encode())
    head = b""
    while b"\r\n\r\n" not in head:
        head += sock.recv(1024)
    assert b"101" in head.split(b"\r\n")[0]
    expect = base64.b64encode(hashlib.sha1(
        (key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()).digest())
    assert expect in head

    payload = json.dumps({"proto": PROTOCOL_VERSION, "id": 1,
                          "kind": "CreatePart", "polygon": RECT}).encode()
    mask = os.urandom(4)
    frame = bytes([0x81])
    n = len(payload)
    if n < 126:
        frame += bytes([0x80 | n])
    else:
        frame += bytes([0x80 | 126]) + struct.pack(">H", n)
    frame += mask + bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    sock.sendall(frame)

    def read_exact(k):
        buf = b""
        while len(buf) < k:
            chunk = sock.recv(k - len(buf))
            assert chunk
            buf += chunk
        return buf

    h = read_exact(2)
    assert h[0] & 0x0F == 0x1
    ln = h[1] & 0x7F
    if ln == 126:
        ln = struct.unpack(">H", read_exact(2))[0]
    elif ln == 127:
        ln = struct.unpack(">Q", read_exact(8))[0]
    reply = json.loads(read_exact(ln))
    assert reply["status"] == "OK"
    assert reply["delta"]["counts"]["parts"] == 1
    sock.close()
