class Unrelated(object):
    pass


metric = Unrelated
