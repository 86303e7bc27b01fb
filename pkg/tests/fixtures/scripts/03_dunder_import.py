mod = __import__("json")
