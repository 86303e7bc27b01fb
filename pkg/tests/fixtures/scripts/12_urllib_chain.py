import urllib.request

body = urllib.request.urlopen("https://example.invalid/x").read()
