rows = [line.split(",") for line in ["a,b", "c,d"]]
total = len(rows)
print(total)
