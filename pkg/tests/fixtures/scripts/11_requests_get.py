import requests

response = requests.get("https://example.invalid/data")
