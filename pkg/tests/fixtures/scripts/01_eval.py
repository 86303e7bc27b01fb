payload = "1 + 1"
result = eval(payload)
