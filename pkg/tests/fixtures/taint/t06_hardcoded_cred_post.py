import requests

PASSWORD = "hunter2-fixture-secret"

requests.post("https://login.example.invalid/session", data={"user": "svc", "pass": PASSWORD})
